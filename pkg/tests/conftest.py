import pytest

from smrlmt.collector import collect
from smrlmt.config import TargetConfig
from smrlmt.fixture import serve_fixture
from smrlmt.model import Action, ActionKind, InputSequence, OutputSequence, Page, User

BASE = "https://app.test"


@pytest.fixture
def config():
    users = [User("alice", "alice", "a-pw", "admin"), User("bob", "bob", "b-pw", "user")]
    return TargetConfig(base_url=BASE, insecure_url="http://app.test:8080", users=users, file_paths=["etc/passwd"])


def action(path, method="GET", form=(), query=(), **kw):
    kind = ActionKind.FORM_SUBMIT if form or method == "POST" else ActionKind.REQUEST
    return Action(kind, method, BASE + path, query_params=query, form_data=form, **kw)


def sequence(sid, *actions):
    return InputSequence(sid, tuple(actions))


class StubExecutor:
    """Answers each action with a page chosen by ``respond(seq, action)``."""

    def __init__(self, respond=None):
        self.respond = respond or (lambda seq, a: f"page for {a.url}".ljust(220, "."))
        self.calls = []

    def execute(self, seq, fresh_session=True):
        self.calls.append(seq)
        pages = []
        for a in seq.actions:
            body = self.respond(seq, a)
            if isinstance(body, Page):
                pages.append(body)
            else:
                pages.append(Page(body.encode(), 200))
        return OutputSequence(seq.id, tuple(pages))


@pytest.fixture(scope="session")
def patched_site():
    with serve_fixture() as fx:
        yield fx


@pytest.fixture(scope="session")
def patched_pool(patched_site):
    patched_site.reset()
    pool = collect(patched_site.target_config())
    patched_site.reset()
    return pool


@pytest.fixture(scope="session")
def vulnerable_site():
    with serve_fixture(["V1", "V2", "V3", "V4"]) as fx:
        yield fx


@pytest.fixture(scope="session")
def vulnerable_pool(vulnerable_site):
    vulnerable_site.reset()
    pool = collect(vulnerable_site.target_config())
    vulnerable_site.reset()
    return pool


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
