"""Web-specific functions callable from relations.

Functions that build follow-up inputs never touch their arguments; they return
new :class:`InputSequence` copies marked as FOLLOW_UP.
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Optional, Protocol
from urllib.parse import urlsplit, urlunsplit

from ..config import TargetConfig
from ..distance import page_equal
from ..model import InputSequence, Page, User
from .values import ActionRef, EvalError, as_action

_USER_FIELD = re.compile(r"user|login|email|name|account", re.I)
_PASS_FIELD = re.compile(r"pass|pwd", re.I)


class Knowledge(Protocol):
    """What the library needs from the collected data pool."""

    def reachable_urls(self, user_id: str) -> set[str]: ...

    def recorded_pages(self, user_id: str) -> Iterable[Page]: ...


def normalize_url(url: str) -> str:
    """Scheme-insensitive, query-less form used for reachability checks."""
    p = urlsplit(url)
    return urlunsplit(("", p.netloc.lower(), p.path or "/", "", ""))


def _seq(v) -> InputSequence:
    if not isinstance(v, InputSequence):
        raise EvalError(f"expected an input sequence, got {type(v).__name__}")
    return v


def _user(v) -> User:
    if not isinstance(v, User):
        raise EvalError(f"expected a user, got {type(v).__name__}")
    return v


def _page(v) -> Page:
    if not isinstance(v, Page):
        raise EvalError(f"expected a page, got {type(v).__name__}")
    return v


def _pos(seq: InputSequence, pos: int, what: str = "action") -> int:
    if not isinstance(pos, int) or isinstance(pos, bool) or not 1 <= pos <= len(seq):
        raise IndexError(f"{what} position {pos!r} out of range 1..{len(seq)}")
    return pos


class WebLibrary:
    def __init__(self, knowledge: Knowledge, config: TargetConfig):
        self.pool = knowledge
        self.config = config
        self._reach_cache: dict[str, frozenset[str]] = {}

    def functions(self) -> dict[str, Callable]:
        return {
            "changeCredentials": self.change_credentials,
            "copyActionTo": self.copy_action_to,
            "cannotReachThroughGUI": self.cannot_reach_through_gui,
            "isSupervisorOf": self.is_supervisor_of,
            "isLogin": self.is_login,
            "afterLogin": self.after_login,
            "isSignup": self.is_signup,
            "isError": self.is_error,
            "userCanRetrieveContent": self.user_can_retrieve_content,
            "setChannel": self.set_channel,
            "setParameterValue": self.set_parameter_value,
            "parameterCount": self.parameter_count,
            "sessionIdOf": self.session_id_of,
        }

    def reachable(self, user: User) -> frozenset[str]:
        if user.id not in self._reach_cache:
            self._reach_cache[user.id] = frozenset(normalize_url(u) for u in self.pool.reachable_urls(user.id))
        return self._reach_cache[user.id]

    # -- follow-up construction ------------------------------------------

    def change_credentials(self, seq, user) -> InputSequence:
        """Copy of ``seq`` logging in as ``user`` and attributed to ``user``."""
        seq, user = _seq(seq), _user(user)
        actions = []
        for a in seq.actions:
            if a.is_login:
                a = a.with_form_data(_swap_credentials(a.form_data, a.user, user))
            actions.append(a.with_user(user))
        return seq.derive(actions)

    def copy_action_to(self, seq, source, to) -> InputSequence:
        """Insert a copy of an action at position ``to``; later actions shift by one.

        ``source`` is either the 1-based position of an action of ``seq`` or an
        action (possibly taken from another sequence).
        """
        seq = _seq(seq)
        if isinstance(source, int) and not isinstance(source, bool):
            action = seq.actions[_pos(seq, source) - 1]
        else:
            action = as_action(source)
        if not isinstance(to, int) or not 1 <= to <= len(seq) + 1:
            raise IndexError(f"insert position {to!r} out of range 1..{len(seq) + 1}")
        actions = list(seq.actions)
        actions.insert(to - 1, action)
        return seq.derive(actions)

    def set_channel(self, *args):
        """``setChannel(action, ch)`` or ``setChannel(input, pos, ch)``."""
        if len(args) == 2:
            target, channel = args
            if isinstance(target, ActionRef):
                seq = target.sequence
                actions = list(seq.actions)
                actions[target.position - 1] = target.action.with_channel(channel)
                return ActionRef(seq.derive(actions), target.position)
            return as_action(target).with_channel(channel)
        seq, pos, channel = args
        seq = _seq(seq)
        actions = list(seq.actions)
        actions[_pos(seq, pos) - 1] = actions[pos - 1].with_channel(channel)
        return seq.derive(actions)

    def set_parameter_value(self, seq, action_pos, param_pos, value) -> InputSequence:
        seq = _seq(seq)
        actions = list(seq.actions)
        i = _pos(seq, action_pos) - 1
        actions[i] = actions[i].with_parameter(param_pos, _stringify(value))
        return seq.derive(actions)

    # -- predicates --------------------------------------------------------

    def cannot_reach_through_gui(self, user, url) -> bool:
        return normalize_url(str(url)) not in self.reachable(_user(user))

    def is_supervisor_of(self, a, b) -> bool:
        a, b = _user(a), _user(b)
        if self.config.supervision is not None:
            return (a.id, b.id) in set(self.config.supervision)
        return self.reachable(a) >= self.reachable(b)

    def is_login(self, action) -> bool:
        return as_action(action).is_login

    def is_signup(self, action) -> bool:
        return as_action(action).is_signup

    def after_login(self, action) -> bool:
        if not isinstance(action, ActionRef):
            return False
        return any(a.is_login for a in action.preceding())

    def is_error(self, page) -> bool:
        page = _page(page)
        # status 0 marks a transport failure: nothing usable came back
        if page.status == 0 or page.status >= self.config.error_status_floor:
            return True
        text = page.text
        return any(r.search(text) for r in self.config.error_regexes)

    def user_can_retrieve_content(self, user, page) -> bool:
        user, page = _user(user), _page(page)
        threshold = self.config.page_eq_threshold
        return any(page_equal(p.body, page.body, threshold) for p in self.pool.recorded_pages(user.id))

    # -- accessors ---------------------------------------------------------

    def parameter_count(self, action) -> int:
        return len(as_action(action).parameters)

    def session_id_of(self, page) -> str:
        return _page(page).session_id


def _stringify(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _swap_credentials(form, old: Optional[User], new: User) -> list[tuple[str, str]]:
    out = []
    for name, value in form:
        if old is not None and value == old.username and not _PASS_FIELD.search(name):
            value = new.username
        elif old is not None and value == old.password:
            value = new.password
        elif old is None and _PASS_FIELD.search(name):
            value = new.password
        elif old is None and _USER_FIELD.search(name):
            value = new.username
        out.append((name, value))
    return out
