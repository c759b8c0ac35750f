import pytest
import requests

from smrlmt.fixture import ACCOUNTS, COOKIE, PAGE_ROLES, STATIC_PAGES, FixtureApp, serve_fixture


def login(app, user, secure=True):
    pw = ACCOUNTS[user][0]
    resp = app.handle("POST", "/login", {"username": user, "password": pw}, {}, secure)
    cookie = dict(resp.headers).get("Set-Cookie", "")
    return resp, cookie.split(";")[0].split("=", 1)[1] if cookie else ""


@pytest.mark.parametrize("vulns,status", [((), 403), (("V1",), 200)])
def test_v1_start_slave(vulns, status):
    app = FixtureApp(vulns)
    _, sid = login(app, "tester")
    assert app.handle("GET", "/admin/startSlave", {}, {COOKIE: sid}, True).status == status
    # the rest of the admin area stays protected
    assert app.handle("GET", "/admin", {}, {COOKIE: sid}, True).status == 403


@pytest.mark.parametrize("vulns,status", [((), 403), (("V2",), 302)])
def test_v2_plain_login(vulns, status):
    resp, _ = login(FixtureApp(vulns), "devel", secure=False)
    assert resp.status == status


def test_v3_traversal():
    safe, weak = FixtureApp(), FixtureApp(["V3"])
    sids = [login(a, "devel")[1] for a in (safe, weak)]
    for target in ("/download?path=../../etc/passwd", "/download?path=etc/passwd"):
        assert safe.handle("GET", target, {}, {COOKIE: sids[0]}, True).status == 403
        resp = weak.handle("GET", target, {}, {COOKIE: sids[1]}, True)
        assert resp.status == 200 and resp.body.startswith(b"root:")
    assert safe.handle("GET", "/download?path=docs/manual.txt", {}, {COOKIE: sids[0]}, True).status == 200


@pytest.mark.parametrize("vulns,keeps", [((), False), (("V4",), True)])
def test_v4_signup_session(vulns, keeps):
    app = FixtureApp(vulns)
    _, sid = login(app, "tester")
    resp = app.handle("POST", "/signup", {"username": "mallory", "password": "m"}, {COOKIE: sid}, True)
    new = dict(resp.headers)["Set-Cookie"].split(";")[0].split("=", 1)[1]
    assert (new == sid) is keeps


def test_signup_of_builtin_name_is_refused():
    assert FixtureApp().handle("POST", "/signup", {"username": "admin", "password": "x"}, {}, True).status == 409


def test_unknown_toggle():
    with pytest.raises(ValueError):
        FixtureApp(["V9"])


def test_anonymous_and_unknown_paths():
    app = FixtureApp()
    assert app.handle("GET", "/stats", {}, {}, True).status == 302
    assert app.handle("GET", "/nowhere", {}, {}, True).status == 404


def test_reset_restores_session_ids():
    app = FixtureApp()
    first = login(app, "admin")[1]
    assert login(app, "admin")[1] != first
    app.reset()
    assert login(app, "admin")[1] == first


def test_pages_are_long_enough_for_the_similarity_threshold():
    # 5% of 200 bytes is 10 edits, which keeps small wording changes apart
    app = FixtureApp()
    assert all(len(render()) >= 200 for render in STATIC_PAGES.values())
    assert len(app.login_page()) >= 200 and len(app.forbidden().body) >= 200
    assert set(PAGE_ROLES) <= set(STATIC_PAGES)


def test_served_bodies_are_byte_identical_across_resets():
    with serve_fixture() as fx:
        def visit():
            s = requests.Session()
            s.post(fx.insecure_url.replace(str(fx.port), str(fx.secure_port)) + "/login", data={"username": "admin", "password": "admin-pw"})
            return [s.get(f"http://127.0.0.1:{fx.secure_port}{p}").content for p in ("/home", "/admin", "/stats")]

        a = visit()
        fx.reset()
        assert visit() == a
        assert b"Administration console" in a[1]
