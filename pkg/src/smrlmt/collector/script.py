"""Manually written test scripts in a small line-oriented format.

::

    # sign in and open the job list
    visit /login
    fill user=admin pass=s3cret
    submit
    header X-Requested-With: fetch
    click /jobs

``visit`` requests a path, ``fill`` stages form fields, ``submit [target]``
posts the staged fields (to the current page unless a target path is given)
and ``click`` follows a link given by its path. ``header`` applies to every
later action. Statements may also be separated by ``;`` on one line.
"""

from __future__ import annotations

import shlex
from dataclasses import replace
from typing import Optional
from urllib.parse import urljoin

from ..config import TargetConfig
from ..model import Action, ActionKind, InputSequence, OutputSequence, Provenance, Session, User
from .crawler import split_url

VERBS = ("visit", "fill", "submit", "click", "header")


class ScriptParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        for part in line.split(";"):
            part = part.strip()
            if part:
                yield lineno, part


def ingest_script(text: str, config: TargetConfig, seq_id: str = "script-001") -> InputSequence:
    base = config.base_url.rstrip("/") + "/"
    actions: list[Action] = []
    headers: list[tuple[str, str]] = []
    current: Optional[str] = None
    pending: Optional[tuple[int, list[tuple[str, str]]]] = None

    def resolve(target: str) -> str:
        return urljoin(base if current is None else current, target)

    def request(url: str, lineno: int, locator: Optional[str] = None) -> Action:
        bare, query = split_url(url)
        try:
            return Action(ActionKind.REQUEST, "GET", bare, query, element_locator=locator, headers=tuple(headers))
        except ValueError as exc:
            raise ScriptParseError(str(exc), lineno) from None

    for lineno, stmt in _statements(text):
        verb, _, rest = stmt.partition(" ")
        rest = rest.strip()
        if verb not in VERBS:
            raise ScriptParseError(f"unknown verb {verb!r}", lineno)
        if pending is not None and verb not in ("fill", "submit"):
            raise ScriptParseError("fill must be followed by submit", pending[0])
        if verb == "visit":
            if not rest:
                raise ScriptParseError("visit needs a path", lineno)
            current = resolve(rest)
            actions.append(request(current, lineno))
        elif verb == "click":
            if not rest or rest.startswith(("#", ".")) or "[" in rest:
                raise ScriptParseError("click needs a link path", lineno)
            url = resolve(rest)
            actions.append(request(url, lineno, f"a[href='{rest}']"))
            current = url
        elif verb == "header":
            name, sep, value = rest.partition(":")
            if not sep or not name.strip():
                raise ScriptParseError("header needs 'name: value'", lineno)
            headers.append((name.strip(), value.strip()))
        elif verb == "fill":
            try:
                words = shlex.split(rest)
            except ValueError as exc:
                raise ScriptParseError(str(exc), lineno) from None
            if not words or any("=" not in w for w in words):
                raise ScriptParseError("fill needs name=value pairs", lineno)
            fields = [tuple(w.split("=", 1)) for w in words]
            pending = (pending[0] if pending else lineno, (pending[1] if pending else []) + fields)
        else:
            if current is None and not rest:
                raise ScriptParseError("submit without a page or target", lineno)
            url = resolve(rest) if rest else current
            data = pending[1] if pending else []
            pending = None
            bare, query = split_url(url)
            is_signup = bool(config.signup_regex.search(bare))
            has_pass = any(_is_password(n) for n, _ in data)
            is_login = not is_signup and has_pass and len(data) >= 2 and bool(config.login_regex.search(bare))
            actions.append(
                Action(
                    ActionKind.FORM_SUBMIT,
                    "POST",
                    bare,
                    query,
                    form_data=data,
                    element_locator="form",
                    is_login=is_login,
                    is_signup=is_signup,
                    headers=tuple(headers),
                )
            )
            current = url
    if pending is not None:
        raise ScriptParseError("fill must be followed by submit", pending[0])
    if not actions:
        raise ScriptParseError("script has no actions", 1)
    user = _script_user(actions, config.users)
    if user is not None:
        actions = [a.with_user(user) for a in actions]
    return InputSequence(seq_id, tuple(actions), Provenance.SCRIPT)


def _is_password(name: str) -> bool:
    n = name.lower()
    return "pass" in n or "pwd" in n


def _script_user(actions: list[Action], users: list[User]) -> Optional[User]:
    for a in actions:
        if a.is_login:
            values = {v for _, v in a.form_data}
            for u in users:
                if u.username in values and u.password in values:
                    return u
    return None


def with_recorded_sessions(seq: InputSequence, output: OutputSequence) -> InputSequence:
    """Attach to each action the session that was current when it was issued."""
    owner = seq.user.id if seq.user else None
    actions = []
    prev = ""
    for a, page in zip(seq.actions, output.pages):
        actions.append(replace(a, session=Session(prev, owner if prev else None)))
        prev = page.session_id
    return InputSequence(seq.id, tuple(actions), seq.provenance, seq.parent)
