"""Per-user crawling into a state graph whose states are told apart by edit distance."""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional
from urllib.parse import parse_qsl, urljoin, urlsplit, urlunsplit

from ..config import TargetConfig
from ..distance import page_equal
from ..executor import HttpExecutor, session_cookie
from ..model import Action, ActionKind, BodyReader, BodyWriter, Page, Session, User
from .htmlparse import Form, parse_html

log = logging.getLogger(__name__)

_SKIP_SCHEMES = ("javascript:", "mailto:", "tel:", "data:")
_TEXTLIKE = {"text", "search", "email", "url", "tel", "number", "textarea", ""}


class CrawlError(RuntimeError):
    pass


@dataclass
class State:
    id: str
    page: Page
    url: str
    resources: list[str] = field(default_factory=list)

    def to_dict(self, write_body: BodyWriter | None = None) -> dict[str, Any]:
        return {"id": self.id, "url": self.url, "resources": list(self.resources), "page": self.page.to_dict(write_body)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], read_body: BodyReader | None = None) -> "State":
        return cls(d["id"], Page.from_dict(d["page"], read_body), d["url"], list(d.get("resources", ())))


@dataclass
class Edge:
    source: str
    action: Action
    target: str
    page: Page

    def to_dict(self, write_body: BodyWriter | None = None) -> dict[str, Any]:
        return {
            "source": self.source,
            "target": self.target,
            "action": self.action.to_dict(),
            "page": self.page.to_dict(write_body),
        }

    @classmethod
    def from_dict(cls, d, users: Mapping[str, User], read_body: BodyReader | None = None) -> "Edge":
        return cls(d["source"], Action.from_dict(d["action"], users), d["target"], Page.from_dict(d["page"], read_body))


@dataclass
class StateGraph:
    owner: str
    root: str
    states: list[State] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    errors: list[dict[str, Any]] = field(default_factory=list)
    truncated: bool = False

    def state(self, sid: str) -> State:
        for s in self.states:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def match(self, body: bytes, threshold: float) -> Optional[State]:
        """First state, in insertion order, whose cached page is close enough to ``body``."""
        for s in self.states:
            if page_equal(s.page.body, body, threshold):
                return s
        return None

    def out_edges(self, sid: str) -> list[Edge]:
        return [e for e in self.edges if e.source == sid]

    def reachable_urls(self) -> set[str]:
        return {e.action.url for e in self.edges}

    def to_dict(self, write_body: BodyWriter | None = None) -> dict[str, Any]:
        return {
            "owner": self.owner,
            "root": self.root,
            "truncated": self.truncated,
            "states": [s.to_dict(write_body) for s in self.states],
            "edges": [e.to_dict(write_body) for e in self.edges],
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d, users: Mapping[str, User], read_body: BodyReader | None = None) -> "StateGraph":
        return cls(
            d["owner"],
            d["root"],
            [State.from_dict(s, read_body) for s in d["states"]],
            [Edge.from_dict(e, users, read_body) for e in d["edges"]],
            list(d.get("errors", ())),
            bool(d.get("truncated", False)),
        )


def split_url(url: str) -> tuple[str, tuple[tuple[str, str], ...]]:
    p = urlsplit(url)
    bare = urlunsplit((p.scheme, p.netloc, p.path or "/", "", ""))
    return bare, tuple(parse_qsl(p.query, keep_blank_values=True))


class _Scope:
    """Same-origin filter: only URLs on the target's origins and under its base path."""

    def __init__(self, config: TargetConfig):
        base = urlsplit(config.base_url)
        self.netlocs = {base.netloc}
        if config.insecure_url:
            self.netlocs.add(urlsplit(config.insecure_url).netloc)
        self.prefix = base.path.rstrip("/") + "/" if base.path.strip("/") else "/"

    def __contains__(self, url: str) -> bool:
        p = urlsplit(url)
        path = p.path or "/"
        return p.scheme in ("http", "https") and p.netloc in self.netlocs and (path + "/").startswith(self.prefix)


def classify_form(form: Form, url: str, config: TargetConfig) -> tuple[bool, bool]:
    """(is_login, is_signup) for a form posted to ``url``; signup wins when both match."""
    labels = " ".join((urlsplit(url).path, form.name, form.id))
    is_signup = bool(config.signup_regex.search(labels))
    is_login = (
        not is_signup and form.has_password and form.has_text and bool(config.login_regex.search(labels))
    )
    return is_login, is_signup


def fill_form(form: Form, config: TargetConfig, user: Optional[User], login: bool) -> list[tuple[str, str]]:
    defaults = config.form_defaults
    data: list[tuple[str, str]] = []
    radios: set[str] = set()
    username_done = False
    for f in form.fields:
        t = f.type
        if t in ("hidden", "select"):
            data.append((f.name, f.value))
        elif t in ("submit", "button", "image", "reset"):
            if t == "submit" and f.value:
                data.append((f.name, f.value))
        elif t == "checkbox":
            data.append((f.name, f.value or "on"))
        elif t == "radio":
            if f.name not in radios:
                radios.add(f.name)
                data.append((f.name, f.value or "on"))
        elif t == "password":
            data.append((f.name, user.password if login and user else defaults.get("password", "test")))
        elif login and user and not username_done and t in ("text", "email"):
            username_done = True
            data.append((f.name, user.username))
        elif f.value:
            data.append((f.name, f.value))
        else:
            key = t if t in defaults else "text"
            data.append((f.name, defaults.get(key, "test")))
    return data


def candidate_actions(state: State, config: TargetConfig, user: Optional[User], scope: _Scope) -> list[Action]:
    """Every in-scope anchor and form of ``state``'s page, in document order, without duplicates."""
    doc = parse_html(state.page.text)
    base = urljoin(state.url, doc.base) if doc.base else state.url
    out: list[Action] = []
    seen = set()
    items = sorted(
        [(lnk.locator, "a", lnk) for lnk in doc.links] + [(frm.locator, "f", frm) for frm in doc.forms],
        key=lambda t: _doc_order(t[0]),
    )
    for locator, kind, item in items:
        if kind == "a":
            href = item.href.strip()
            if not href or href.startswith("#") or href.lower().startswith(_SKIP_SCHEMES):
                continue
            url = urljoin(base, href).split("#", 1)[0]
            if url not in scope:
                continue
            bare, query = split_url(url)
            action = Action(ActionKind.REQUEST, "GET", bare, query_params=query, element_locator=locator, user=user)
        else:
            url = urljoin(base, item.action or state.url).split("#", 1)[0]
            if url not in scope:
                continue
            bare, query = split_url(url)
            is_login, is_signup = classify_form(item, bare, config)
            action = Action(
                ActionKind.FORM_SUBMIT,
                (item.method or "POST").upper(),
                bare,
                query_params=query,
                form_data=fill_form(item, config, user, is_login),
                element_locator=locator,
                user=user,
                is_login=is_login,
                is_signup=is_signup,
            )
        fp = action.fingerprint()
        if fp not in seen:
            seen.add(fp)
            out.append(action)
    return out


def _doc_order(locator: str) -> list[int]:
    return [int(step.rsplit("[", 1)[1][:-1]) for step in locator.strip("/").split("/")]


def crawl(
    config: TargetConfig,
    user: Optional[User],
    budget: Optional[float] = None,
    executor: Optional[HttpExecutor] = None,
) -> StateGraph:
    """Breadth-first exploration of the target as ``user``.

    Each candidate action is tried in a fresh session after replaying the path
    that first reached its source state, so every recorded edge can be replayed
    the same way later on.
    """
    ex = executor or HttpExecutor(config)
    budget = config.crawl_budget if budget is None else budget
    deadline = time.monotonic() + budget
    scope = _Scope(config)
    owner = user.id if user else "anonymous"
    threshold = config.state_eq_threshold

    bare, query = split_url(config.base_url)
    root_req = Action(ActionKind.REQUEST, "GET", bare, query_params=query, user=user)
    sess = ex.new_session()
    try:
        root_page = ex.send(sess, root_req)
    finally:
        sess.close()
    if root_page.status == 0:
        raise CrawlError(f"cannot reach {config.base_url}")

    def new_state(page: Page) -> State:
        url = ex.logical_url(page.final_url) if page.final_url else config.base_url
        doc = parse_html(page.text)
        resources = [urljoin(url, r) for r in doc.resources]
        s = State(f"{owner}-s{len(graph.states)}", page, url, resources)
        graph.states.append(s)
        return s

    graph = StateGraph(owner, f"{owner}-s0")
    new_state(root_page)
    paths: dict[str, list[Action]] = {graph.root: []}
    frontier = deque([graph.root])
    while frontier:
        sid = frontier.popleft()
        state = graph.state(sid)
        for cand in candidate_actions(state, config, user, scope):
            if time.monotonic() > deadline:
                graph.truncated = True
                log.info("crawl budget for %s exhausted", owner)
                return graph
            sess = ex.new_session()
            try:
                for step in paths[sid]:
                    ex.send(sess, step)
                before = session_cookie(sess.cookies, config.session_cookie)
                action = replace(cand, session=Session(before, owner if before else None))
                page = ex.send(sess, action)
            finally:
                sess.close()
            if page.status == 0:
                graph.errors.append({"state": sid, "method": action.method, "url": action.url})
                log.debug("transport failure on %s %s, skipped", action.method, action.url)
                continue
            target = graph.match(page.body, threshold)
            if target is None:
                target = new_state(page)
                paths[target.id] = paths[sid] + [action]
                frontier.append(target.id)
            graph.edges.append(Edge(sid, action, target.id, page))
    return graph
