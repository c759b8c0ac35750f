"""
Writing and checking a relation
===============================

Relations are plain text. ``check`` points at mistakes with line and column,
and a checked relation compiles into something the engine can run.
"""

from smrlmt.collector import collect
from smrlmt.dsl import check_all, load_relations, parse, tokenize
from smrlmt.engine import DataProvider, execute_metamorphic_testing, render_summary, campaign_report
from smrlmt.executor import HttpExecutor
from smrlmt.fixture import serve_fixture
from smrlmt.interp import WebLibrary, compile_relation

# Requesting a page a second time right away should give the same page back,
# unless the request signs in or registers someone.
draft = """
package demo;

MR REPEAT_IS_IDEMPOTENT {
  for (var a : Input(1).actions) {
    IMPLIES(
      AND(
        NOT(isLogin(a)),
        NOT(isSignup(a)),
        EQUAL(Input(2), copyActionTo(Input(1), a, a.position + 1))
      ),
      EQUAL(Output(Input(2), a.position), Output(Input(2), a.positon + 1))
    );
  }
}
"""

for err in check_all(parse(tokenize(draft))):
    print(err.format("repeat.smrl"))

# fix the typo and the relation checks clean
(ast,) = load_relations(draft.replace("a.positon", "a.position"))
rel = compile_relation(ast)
print(rel.name, "reads", rel.referenced_input_types)

site = serve_fixture()
config = site.target_config()
pool = collect(config)
site.reset()
result = execute_metamorphic_testing(
    rel, DataProvider.from_pool(pool, config), HttpExecutor(config), WebLibrary(pool, config).functions()
)
print(render_summary(campaign_report([result], {})))
site.stop()
