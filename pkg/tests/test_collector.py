import pytest

from smrlmt.collector import (
    DataPool,
    PoolError,
    ScriptParseError,
    collect,
    crawl,
    derive_inputs,
    ingest_script,
    parse_html,
)
from smrlmt.collector.crawler import Edge, State, StateGraph, classify_form
from smrlmt.model import ActionKind, Page

from conftest import action

CRAWL_COUNTS = {"admin": (13, 22), "devel": (9, 14), "tester": (8, 12)}


# -- html --------------------------------------------------------------------


def test_parse_links_forms_and_locators():
    doc = parse_html(
        '<html><body><a href="/a">A</a><p><a href="/b">B</a></p>'
        '<form action="/f"><input type="text" name="q"><input type="password" name="pw">'
        '<select name="s"><option value="1">one</option></select></form>'
        '<img src="/logo.png"></body></html>'
    )
    assert [l.href for l in doc.links] == ["/a", "/b"]
    assert doc.links[1].locator == "/html[1]/body[1]/p[1]/a[1]"
    (form,) = doc.forms
    assert form.method is None and form.has_password and form.has_text
    assert [f.name for f in form.fields] == ["q", "pw", "s"]
    assert "/logo.png" in doc.resources


def test_signup_classification_wins(config):
    (form,) = parse_html(
        '<form name="signup" action="/signup"><input name="username"><input type="password" name="password"></form>'
    ).forms
    assert classify_form(form, config.base_url + "/signup", config) == (False, True)
    (login,) = parse_html('<form action="/login"><input name="u"><input type="password" name="p"></form>').forms
    assert classify_form(login, config.base_url + "/login", config) == (True, False)
    assert classify_form(login, config.base_url + "/search", config) == (False, False)


# -- derivation over synthetic graphs -----------------------------------------


def graph(edges, n):
    page = Page(b"x", 200)
    states = [State(f"s{i}", page, f"https://app.test/{i}", []) for i in range(n)]
    g = StateGraph("u", "s0", states)
    for src, dst in edges:
        g.edges.append(Edge(f"s{src}", action(f"/{src}-{dst}"), f"s{dst}", page))
    return g


def test_path_graph_gives_one_sequence():
    (seq,) = derive_inputs(graph([(0, 1), (1, 2)], 3))
    assert [a.url.rsplit("/", 1)[1] for a in seq.actions] == ["0-1", "1-2"]
    assert seq.id == "u-001"


def test_binary_tree_gives_one_sequence_per_leaf():
    g = graph([(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)], 7)
    seqs = derive_inputs(g)
    assert len(seqs) == 4
    assert [s.actions[-1].url.rsplit("/", 1)[1] for s in seqs] == ["1-3", "1-4", "2-5", "2-6"]


def test_back_and_self_edges_are_not_followed():
    g = graph([(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)], 3)
    (seq,) = derive_inputs(g)
    assert len(seq.actions) == 2


def test_root_without_edges_gives_nothing():
    assert derive_inputs(graph([], 1)) == []


# -- scripts ---------------------------------------------------------------------


def test_three_action_script(config):
    seq = ingest_script(
        "# sign in\nvisit /login\nfill username=alice password=a-pw\nsubmit\nheader X-Test: 1; click /reports\n",
        config,
    )
    assert [a.kind for a in seq.actions] == [ActionKind.REQUEST, ActionKind.FORM_SUBMIT, ActionKind.REQUEST]
    login = seq.actions[1]
    assert login.method == "POST" and login.url == config.base_url + "/login"
    assert login.form_data == (("password", "a-pw"), ("username", "alice")) or login.form_data == (
        ("username", "alice"),
        ("password", "a-pw"),
    )
    assert seq.user is not None and seq.user.id == "alice"
    assert seq.actions[2].headers == (("X-Test", "1"),)


@pytest.mark.parametrize(
    "text,line",
    [("", 0), ("# only a comment\n", 0), ("visit /a\njump /b\n", 2), ("fill a=1\nvisit /x\n", 1), ("click #id\n", 1)],
)
def test_bad_scripts(config, text, line):
    with pytest.raises(ScriptParseError) as e:
        ingest_script(text, config)
    if line:
        assert e.value.line == line


# -- crawling the fixture -----------------------------------------------------------


def test_crawl_counts(patched_pool):
    for uid, (states, edges) in CRAWL_COUNTS.items():
        g = patched_pool.graphs[uid]
        assert (len(g.states), len(g.edges)) == (states, edges), uid
        assert not g.truncated and not g.errors
    assert [len([s for s in patched_pool.inputs if s.user.id == u]) for u in CRAWL_COUNTS] == [9, 6, 5]


def test_collection_is_deterministic_after_reset(patched_site, patched_pool):
    patched_site.reset()
    again = collect(patched_site.target_config())
    for uid, g in patched_pool.graphs.items():
        assert again.graphs[uid].to_dict() == g.to_dict()
    assert again.inputs == patched_pool.inputs


def test_identical_pages_collapse_into_one_state(patched_site):
    patched_site.reset()
    g = crawl(patched_site.target_config(), None)
    assert len(g.states) == 4
    back = [e for e in g.edges if e.action.url.endswith("/") and e.action.method == "GET"]
    # every "back to sign-in" link lands on the root state instead of a copy of it
    assert len(back) == 3 and {e.target for e in back} == {g.root}


def test_every_derived_action_url_was_reached(patched_pool):
    for seq in patched_pool.inputs:
        reach = patched_pool.reachable_urls(seq.user.id)
        for a in seq.actions:
            assert a.url in reach or a.is_login or a.is_signup or a.kind is ActionKind.FORM_SUBMIT


def test_recorded_outputs_line_up_with_inputs(patched_pool):
    for seq in patched_pool.inputs:
        assert len(patched_pool.outputs[seq.id].pages) == len(seq.actions)
    assert all(a.is_signup for a in (patched_pool.inputs[i].actions[-1] for i in (8, 14, 19)))


def test_pool_round_trip(patched_pool, tmp_path):
    patched_pool.save(tmp_path / "pool")
    loaded = DataPool.load(tmp_path / "pool")
    assert loaded.inputs == patched_pool.inputs
    assert loaded.outputs == patched_pool.outputs
    assert {u: g.to_dict() for u, g in loaded.graphs.items()} == {u: g.to_dict() for u, g in patched_pool.graphs.items()}
    assert loaded.reachable_urls("admin") == patched_pool.reachable_urls("admin")


def test_pool_refuses_nonempty_directory(patched_pool, tmp_path):
    (tmp_path / "keep.txt").write_text("x")
    with pytest.raises(PoolError):
        patched_pool.save(tmp_path)
    with pytest.raises(PoolError):
        DataPool.load(tmp_path)


def test_collect_runs_scripts(patched_site, tmp_path):
    script = tmp_path / "devel.txt"
    script.write_text("visit /\nfill username=devel password=devel-pw\nsubmit /login\nclick /stats\n")
    cfg = patched_site.target_config(users=[patched_site.target_config().user("devel")])
    pool = collect(cfg, scripts=[script])
    seq = pool.inputs[-1]
    assert seq.id == "script-devel"
    out = pool.outputs[seq.id]
    assert out.page(3).status == 200 and b"Build statistics" in out.page(3).body
    assert pool.sessions() and all(not s.anonymous for s in pool.sessions())
