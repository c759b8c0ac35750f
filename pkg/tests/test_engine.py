import json
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smrlmt.config import TargetConfig
from smrlmt.dsl import parse_source
from smrlmt.engine import (
    HTTP_METHODS,
    CampaignResult,
    DataProvider,
    add_failure,
    campaign_report,
    execute_metamorphic_testing,
    extract_source_input_types,
    render_summary,
    strip_timestamps,
)
from smrlmt.interp import ProviderError, compile_relation
from smrlmt.model import User

from conftest import StubExecutor, action, sequence


def relation(body):
    (ast,) = parse_source(f"MR T {{ {body} }}")
    return compile_relation(ast)


def seqs(n):
    return [sequence(f"s{i}", action(f"/p{i}")) for i in range(1, n + 1)]


USERS = [User("u1", "u1", "p"), User("u2", "u2", "p")]


def counting():
    count = []
    return count, {"tick": lambda: count.append(1) or True}


def test_runs_are_the_product_of_pool_sizes():
    rel = relation("AND(tick(), EQUAL(Input(1), Input(1)), EQUAL(User(1), User(1)));")
    count, fns = counting()
    res = execute_metamorphic_testing(rel, DataProvider({"Input": seqs(3), "User": USERS}), StubExecutor(), fns)
    assert len(count) == res.runs == 6


def test_random_file_path_views(config):
    rel = relation('AND(tick(), EQUAL(Input(1), Input(1)), NOT(EQUAL(RandomFilePath(), "")));')
    pool = SimpleNamespace(inputs=seqs(2), users=USERS, sessions=lambda: [])
    provider = DataProvider.from_pool(pool, config, seed=42)
    assert provider.size("RandomFilePath") == 100
    count, fns = counting()
    res = execute_metamorphic_testing(rel, provider, StubExecutor(), fns)
    assert len(count) == res.runs == 2 * 100


def test_types_in_lexicographic_order():
    rel = relation("AND(EQUAL(User(1), User(1)), EQUAL(Input(1), Input(1)), EQUAL(HttpMethod(), \"GET\"));")
    assert extract_source_input_types(rel) == ["HttpMethod", "Input", "User"]


def test_outer_type_varies_slowest():
    order = []
    rel = relation("AND(log(Input(1).id, User(1).id), true);")
    fns = {"log": lambda a, b: order.append((a, b)) or True}
    execute_metamorphic_testing(rel, DataProvider({"Input": seqs(2), "User": USERS}), StubExecutor(), fns)
    assert order == [("s1", "u1"), ("s1", "u2"), ("s2", "u1"), ("s2", "u2")]


def test_empty_pool_is_an_error():
    rel = relation("EQUAL(User(1), User(1));")
    with pytest.raises(ProviderError):
        execute_metamorphic_testing(rel, DataProvider({"User": []}), StubExecutor(), {})


@given(st.integers(1, 5))
def test_views_rotate_and_cycle(n):
    p = DataProvider({"X": list(range(n))})
    original = p.view("X")
    seen = []
    for _ in range(n):
        seen.append(tuple(p.view("X")))
        p.next_view("X")
    assert len(set(seen)) == n
    assert all(sorted(v) == original for v in seen)
    assert p.view("X") == original
    assert not p.has_more_views("X")
    p.reset_views("X")
    assert p.has_more_views("X")


def test_view_item_indexing():
    p = DataProvider({"X": ["a", "b", "c"]})
    p.next_view("X")
    assert [p.item("X", i) for i in (1, 2, 3)] == ["b", "c", "a"]
    with pytest.raises(ProviderError):
        p.item("X", 4)


def test_http_method_pool():
    pool = SimpleNamespace(inputs=seqs(1), users=USERS, sessions=lambda: [])
    p = DataProvider.from_pool(pool, TargetConfig(base_url="https://a.test", users=USERS))
    assert p.view("HttpMethod") == list(HTTP_METHODS)
    assert p.size("Action") == 1


# -- dedup ---------------------------------------------------------------------


def test_crafted_dedup_campaign():
    a, b, r = action("/a"), action("/b"), action("/r")
    follow = {"s1": [a, b], "s2": [b, a], "s3": [a, b, r]}
    rel = relation("IMPLIES(EQUAL(Input(2), pick(Input(1))), false);")
    fns = {"pick": lambda s: s.derive(follow[s.id])}
    res = execute_metamorphic_testing(rel, DataProvider({"Input": seqs(3)}), StubExecutor(), fns)
    assert res.raw_failures == 3
    assert len(res.failures) == 2
    union = frozenset().union(*(f.novel_requests for f in res.failures))
    assert union == {a.fingerprint(), b.fingerprint(), r.fingerprint()}
    assert res.failures[1].novel_requests == {r.fingerprint()}


def test_failure_without_inputs_is_counted_not_reported():
    rel = relation("FALSE();")
    res = execute_metamorphic_testing(rel, DataProvider({}), StubExecutor(), {})
    assert res.runs == 1 and res.raw_failures == 1 and res.failures == []


class FakeCtx:
    def __init__(self, seqs):
        self.seqs = seqs
        self.output_cache = {}

    def follow_up_inputs(self):
        return self.seqs

    def source_inputs(self):
        return []


@settings(max_examples=200)
@given(st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=4), max_size=8))
def test_dedup_loses_no_request(raw):
    result = CampaignResult("R")
    for paths in raw:
        seq = sequence("s", *(action(f"/{p}") for p in paths))
        add_failure(result, "R", FakeCtx([seq]), {})
    novel = [f.novel_requests for f in result.failures]
    assert frozenset().union(*novel) == result.raw_requests
    for i, x in enumerate(novel):
        for y in novel[i + 1 :]:
            assert not (x & y)
    if raw:
        assert result.failures


# -- budget, parallelism, reports ----------------------------------------------


def test_budget_truncates_between_runs():
    t = [0.0]

    def clock():
        return t[0]

    def tick():
        t[0] += 1.0
        return True

    rel = relation("AND(tick(), EQUAL(Input(1), Input(1)));")
    res = execute_metamorphic_testing(rel, DataProvider({"Input": seqs(5)}), StubExecutor(), {"tick": tick}, budget=2.5, clock=clock)
    assert res.truncated
    assert res.runs == 3


def _pure_campaign(workers):
    rel = relation("IMPLIES(EQUAL(Input(3), pick(Input(1), Input(2))), EQUAL(Output(Input(3)), Output(Input(1))));")
    fns = {"pick": lambda x, y: x.derive(x.actions + y.actions)}
    return execute_metamorphic_testing(rel, DataProvider({"Input": seqs(4)}), StubExecutor(), fns, workers=workers)


def test_parallel_matches_sequential():
    a, b = _pure_campaign(1), _pure_campaign(4)
    assert a.runs == b.runs == 4
    assert strip_timestamps(a.to_dict()) == strip_timestamps(b.to_dict())


def test_report_shape(tmp_path):
    res = _pure_campaign(1)
    report = campaign_report([res], {"seed": 42}, tmp_path / "bodies")
    assert report["summary"]["reported_failures"] == len(res.failures) > 0
    text = json.dumps(report)
    assert "sha256" not in text
    bodies = list((tmp_path / "bodies").iterdir())
    assert bodies
    stripped = strip_timestamps(report)
    assert "started_at" not in stripped and "started_at" not in stripped["relations"][0]
    summary = render_summary(report)
    assert summary.splitlines()[0].split() == ["relation", "runs", "raw", "reported", "truncated"]
