import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from smrlmt.model import (
    Action,
    ActionKind,
    Channel,
    FailureRecord,
    InputSequence,
    ModelError,
    OutputSequence,
    Page,
    Provenance,
    Session,
    User,
)

from conftest import BASE, action, sequence

ALICE = User("alice", "alice", "pw", "admin")


def test_user_needs_username():
    with pytest.raises(ModelError):
        User("u1", "", "pw")


def test_anonymous_session():
    assert Session().anonymous
    assert not Session("abc", "alice").anonymous


def test_action_rejects_relative_url():
    with pytest.raises(ModelError):
        Action(ActionKind.REQUEST, "GET", "/relative")


def test_action_cannot_be_login_and_signup():
    with pytest.raises(ModelError):
        action("/x", "POST", form=[("a", "b")], is_login=True, is_signup=True)


def test_channel_follows_scheme():
    a = action("/login")
    assert a.channel is Channel.HTTPS
    b = a.with_channel("HTTP")
    assert b.channel is Channel.HTTP
    assert b.url == "http://app.test/login"
    assert a.url == BASE + "/login"


def test_param_order_does_not_matter_for_equality():
    a = action("/f", "POST", form=[("x", "1"), ("y", "2")])
    b = action("/f", "POST", form=[("y", "2"), ("x", "1")])
    assert a == b
    assert hash(a) == hash(b)
    assert a.fingerprint() == b.fingerprint()


def test_with_parameter_counts_query_first():
    a = action("/d", "POST", query=[("q", "1")], form=[("f", "2")])
    assert a.with_parameter(1, "z").query_params == (("q", "z"),)
    assert a.with_parameter(2, "z").form_data == (("f", "z"),)
    with pytest.raises(IndexError):
        a.with_parameter(3, "z")


def test_sequence_invariants():
    with pytest.raises(ModelError):
        InputSequence("s", ())
    with pytest.raises(ModelError):
        InputSequence("s", (action("/a"),), Provenance.FOLLOW_UP)


def test_derive_keeps_root_parent():
    s = sequence("s1", action("/a"), action("/b"))
    f1 = s.derive([action("/a")])
    f2 = f1.derive([action("/b")])
    assert f1.provenance is Provenance.FOLLOW_UP
    assert f1.parent == "s1" and f2.parent == "s1"
    assert s.derive([action("/a")]).id == f1.id


def test_page_status_range():
    with pytest.raises(ModelError):
        Page(b"", 99)
    with pytest.raises(ModelError):
        Page(b"", 600)
    Page(b"", 0)


def test_output_pages_are_one_based():
    out = OutputSequence("s", (Page(b"a", 200), Page(b"b", 200)))
    assert out.page(2).body == b"b"
    with pytest.raises(IndexError):
        out.page(0)


def test_failure_record_needs_novel_requests():
    with pytest.raises(ModelError):
        FailureRecord("r", (), (), (), {}, frozenset())


def test_action_from_dict_checks_channel():
    d = action("/a").to_dict()
    d["channel"] = "HTTP"
    with pytest.raises(ModelError):
        Action.from_dict(d)


names = st.text("abcxyz_", min_size=1, max_size=6)
values = st.text(max_size=8)
params = st.lists(st.tuples(names, values), max_size=4)
paths = st.lists(st.text("abc", min_size=1, max_size=4), max_size=3).map(lambda p: "/" + "/".join(p))


@st.composite
def actions(draw):
    form = draw(params)
    login = draw(st.booleans())
    return Action(
        ActionKind.FORM_SUBMIT if form else ActionKind.REQUEST,
        draw(st.sampled_from(["GET", "POST", "PUT"])),
        draw(st.sampled_from(["http", "https"])) + "://h.test" + draw(paths),
        query_params=draw(params),
        form_data=form,
        element_locator=draw(st.none() | st.just("/html[1]/body[1]/a[1]")),
        session=Session(draw(st.sampled_from(["", "s1"])), draw(st.sampled_from([None, "alice"]))),
        user=draw(st.sampled_from([None, ALICE])),
        is_login=login,
        is_signup=not login and draw(st.booleans()),
        headers=draw(params),
    )


@given(st.lists(actions(), min_size=1, max_size=4), st.sampled_from(list(Provenance)))
def test_sequence_round_trip(acts, prov):
    seq = InputSequence("s", tuple(acts), prov, "p" if prov is Provenance.FOLLOW_UP else None)
    data = json.loads(json.dumps(seq.to_dict()))
    assert InputSequence.from_dict(data, {"alice": ALICE}) == seq


@given(st.binary(max_size=64), st.sampled_from([0, 200, 302, 404, 599]), st.text(max_size=5))
def test_page_round_trip(body, status, sid):
    page = Page(body, status, sid, "text/html", "https://h.test/x")
    store = {}

    def write(b):
        store["k"] = b
        return "k"

    assert Page.from_dict(page.to_dict(), None) == page
    assert Page.from_dict(page.to_dict(write), store.__getitem__) == page


@given(actions(), st.sampled_from(["HTTP", "HTTPS"]))
def test_channel_change_only_touches_scheme(a, ch):
    b = a.with_channel(ch)
    assert b.url.split("://", 1)[1] == a.url.split("://", 1)[1]
    assert b.channel.value == ch
    assert b.parameters == a.parameters


def test_failure_record_round_trip():
    s = sequence("s1", action("/a", user=ALICE))
    f = s.derive([action("/b", user=ALICE)])
    rec = FailureRecord(
        "pkg.R",
        (s,),
        (f,),
        (OutputSequence(f.id, (Page(b"x" * 10, 200, "sid"),)),),
        {"Input": 1},
        frozenset(f.fingerprints()),
    )
    data = json.loads(json.dumps(rec.to_dict()))
    assert FailureRecord.from_dict(data, {"alice": ALICE}) == rec
