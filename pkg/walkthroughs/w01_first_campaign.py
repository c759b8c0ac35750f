"""
A first campaign against the demo application
==============================================

Start the vulnerable build server with only the authorization bypass seeded,
crawl it as each of its three users and run one relation over what was
collected.
"""

from smrlmt.catalog import load_catalog
from smrlmt.collector import collect
from smrlmt.engine import DataProvider, campaign_report, execute_metamorphic_testing, render_summary
from smrlmt.executor import HttpExecutor
from smrlmt.fixture import serve_fixture
from smrlmt.interp import WebLibrary, compile_relation

site = serve_fixture(["V1"])
config = site.target_config()
print("secure origin:", config.base_url, " plain origin:", config.insecure_url)

# crawling builds one state graph per user and derives input sequences from it
pool = collect(config)
for uid, graph in pool.graphs.items():
    print(f"{uid:7s} {len(graph.states):3d} states {len(graph.edges):3d} edges")
print(len(pool.inputs), "input sequences, e.g.", pool.inputs[0].id)
for a in pool.inputs[0].actions:
    print("   ", a.method, a.url)

# the relation: a URL one user reaches through the GUI and another cannot
# must not serve that other user the same page
rel = compile_relation(load_catalog()["OTG_AUTHZ_002"])
site.reset()
result = execute_metamorphic_testing(
    rel,
    DataProvider.from_pool(pool, config),
    HttpExecutor(config),
    WebLibrary(pool, config).functions(),
)

report = campaign_report([result], {"seed": config.seed})
print(render_summary(report))

# each reported failure carries the follow-up input that exposed it
for f in result.failures:
    for seq in f.follow_up_inputs:
        print(seq.id, "run as", seq.user.id, [a.url.rsplit("/", 1)[-1] for a in seq.actions])

site.stop()
