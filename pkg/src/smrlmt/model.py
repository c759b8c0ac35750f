"""Metamorphic data classes shared by the DSL runtime, the executor and the collector.

Everything here is immutable. Follow-up inputs are built with the ``with_*``
helpers, which always return fresh copies and leave the receiver untouched.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Mapping, Optional
from urllib.parse import urlsplit, urlunsplit

Params = tuple[tuple[str, str], ...]
Fingerprint = tuple[str, str, tuple[tuple[str, str], ...]]


class ActionKind(str, enum.Enum):
    REQUEST = "REQUEST"
    FORM_SUBMIT = "FORM_SUBMIT"


class Channel(str, enum.Enum):
    HTTP = "HTTP"
    HTTPS = "HTTPS"


class Provenance(str, enum.Enum):
    CRAWLED = "CRAWLED"
    SCRIPT = "SCRIPT"
    FOLLOW_UP = "FOLLOW_UP"


class ModelError(ValueError):
    pass


def _params(items: Iterable[Iterable[str]]) -> Params:
    return tuple((str(k), str(v)) for k, v in items)


@dataclass(frozen=True)
class User:
    id: str
    username: str
    password: str
    role: str = ""

    def __post_init__(self) -> None:
        if not self.username:
            raise ModelError("username must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "username": self.username, "password": self.password, "role": self.role}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "User":
        return cls(d["id"], d["username"], d["password"], d.get("role", ""))


@dataclass(frozen=True)
class Session:
    """A Web session; an empty ``id`` is the anonymous, pre-login state."""

    id: str = ""
    owner: Optional[str] = None

    @property
    def anonymous(self) -> bool:
        return not self.id

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "owner": self.owner}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Session":
        return cls(d.get("id", ""), d.get("owner"))


@dataclass(frozen=True, eq=False)
class Action:
    """One user step: a URL request or a form submission.

    ``url`` holds scheme, host, port and path only; the query string lives in
    ``query_params``. The channel is the URL scheme.
    """

    kind: ActionKind
    method: str
    url: str
    query_params: Params = ()
    form_data: Params = ()
    element_locator: Optional[str] = None
    session: Session = field(default_factory=Session)
    user: Optional[User] = None
    is_login: bool = False
    is_signup: bool = False
    headers: Params = ()

    def __post_init__(self) -> None:
        parts = urlsplit(self.url)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ModelError(f"not an absolute http(s) URL: {self.url!r}")
        if self.is_login and self.is_signup:
            raise ModelError("an action cannot be both a login and a signup")
        object.__setattr__(self, "method", self.method.upper())
        object.__setattr__(self, "kind", ActionKind(self.kind))
        object.__setattr__(self, "query_params", _params(self.query_params))
        object.__setattr__(self, "form_data", _params(self.form_data))
        object.__setattr__(self, "headers", _params(self.headers))

    @property
    def channel(self) -> Channel:
        return Channel.HTTPS if urlsplit(self.url).scheme == "https" else Channel.HTTP

    @property
    def parameters(self) -> Params:
        return self.query_params + self.form_data

    def _key(self) -> tuple:
        return (
            self.kind,
            self.method,
            self.url,
            tuple(sorted(self.query_params)),
            tuple(sorted(self.form_data)),
            self.element_locator,
            self.session,
            self.user,
            self.is_login,
            self.is_signup,
            self.headers,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Action):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def fingerprint(self) -> Fingerprint:
        return (self.method, self.url, tuple(sorted(self.parameters)))

    def with_channel(self, channel: Channel | str) -> "Action":
        scheme = "https" if Channel(str(channel).upper()) is Channel.HTTPS else "http"
        parts = urlsplit(self.url)
        return replace(self, url=urlunsplit((scheme,) + tuple(parts[1:])))

    def with_parameter(self, position: int, value: str) -> "Action":
        """Set the value of the 1-based ``position``-th parameter (query first, then form)."""
        nq = len(self.query_params)
        if not 1 <= position <= nq + len(self.form_data):
            raise IndexError(f"parameter position {position} out of range")
        if position <= nq:
            q = list(self.query_params)
            q[position - 1] = (q[position - 1][0], str(value))
            return replace(self, query_params=tuple(q))
        f = list(self.form_data)
        i = position - nq - 1
        f[i] = (f[i][0], str(value))
        return replace(self, form_data=tuple(f))

    def with_form_data(self, form_data: Iterable[Iterable[str]]) -> "Action":
        return replace(self, form_data=_params(form_data))

    def with_user(self, user: Optional[User]) -> "Action":
        return replace(self, user=user)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "method": self.method,
            "url": self.url,
            "channel": self.channel.value,
            "query_params": [list(p) for p in self.query_params],
            "form_data": [list(p) for p in self.form_data],
            "element_locator": self.element_locator,
            "session": self.session.to_dict(),
            "user": self.user.id if self.user else None,
            "is_login": self.is_login,
            "is_signup": self.is_signup,
            "headers": [list(h) for h in self.headers],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], users: Mapping[str, User] | None = None) -> "Action":
        users = users or {}
        uid = d.get("user")
        if uid is not None and uid not in users:
            raise ModelError(f"action refers to unknown user {uid!r}")
        action = cls(
            kind=ActionKind(d["kind"]),
            method=d["method"],
            url=d["url"],
            query_params=_params(d.get("query_params", ())),
            form_data=_params(d.get("form_data", ())),
            element_locator=d.get("element_locator"),
            session=Session.from_dict(d.get("session") or {}),
            user=users[uid] if uid is not None else None,
            is_login=bool(d.get("is_login", False)),
            is_signup=bool(d.get("is_signup", False)),
            headers=_params(d.get("headers", ())),
        )
        if "channel" in d and d["channel"] != action.channel.value:
            raise ModelError(f"channel {d['channel']} disagrees with URL {action.url}")
        return action


@dataclass(frozen=True)
class InputSequence:
    id: str
    actions: tuple[Action, ...]
    provenance: Provenance = Provenance.CRAWLED
    parent: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if not self.actions:
            raise ModelError("an input sequence needs at least one action")
        if self.provenance is Provenance.FOLLOW_UP and not self.parent:
            raise ModelError("follow-up sequences must name their parent")

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def user(self) -> Optional[User]:
        """The user performing the sequence: the first action carrying one."""
        for a in self.actions:
            if a.user is not None:
                return a.user
        return None

    def fingerprints(self) -> set[Fingerprint]:
        return {a.fingerprint() for a in self.actions}

    def content_digest(self) -> str:
        payload = json.dumps([a.to_dict() for a in self.actions], sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def derive(self, actions: Iterable[Action]) -> "InputSequence":
        """Follow-up copy of this sequence with ``actions``; the id is content-derived."""
        actions = tuple(actions)
        tmp = InputSequence("tmp", actions)
        root = self.parent if self.provenance is Provenance.FOLLOW_UP else self.id
        return InputSequence(f"fu-{tmp.content_digest()}", actions, Provenance.FOLLOW_UP, root)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "provenance": self.provenance.value,
            "parent": self.parent,
            "actions": [a.to_dict() for a in self.actions],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], users: Mapping[str, User] | None = None) -> "InputSequence":
        return cls(
            d["id"],
            tuple(Action.from_dict(a, users) for a in d["actions"]),
            Provenance(d.get("provenance", "CRAWLED")),
            d.get("parent"),
        )


BodyWriter = Callable[[bytes], str]
BodyReader = Callable[[str], bytes]


@dataclass(frozen=True)
class Page:
    body: bytes
    status: int
    session_id: str = ""
    content_type: str = ""
    final_url: str = ""

    def __post_init__(self) -> None:
        # status 0 is the synthetic transport-failure page
        if not (self.status == 0 or 100 <= self.status <= 599):
            raise ModelError(f"bad HTTP status {self.status}")

    @property
    def text(self) -> str:
        return self.body.decode("utf-8", errors="replace")

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.body).hexdigest()

    def to_dict(self, write_body: BodyWriter | None = None) -> dict[str, Any]:
        d: dict[str, Any] = {
            "status": self.status,
            "session_id": self.session_id,
            "content_type": self.content_type,
            "final_url": self.final_url,
        }
        if write_body is None:
            d["body_b64"] = base64.b64encode(self.body).decode("ascii")
        else:
            d["body_file"] = write_body(self.body)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], read_body: BodyReader | None = None) -> "Page":
        if "body_file" in d:
            if read_body is None:
                raise ModelError("page body stored in a file but no reader given")
            body = read_body(d["body_file"])
        else:
            body = base64.b64decode(d.get("body_b64", ""))
        return cls(body, int(d["status"]), d.get("session_id", ""), d.get("content_type", ""), d.get("final_url", ""))


@dataclass(frozen=True)
class OutputSequence:
    input: str
    pages: tuple[Page, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pages", tuple(self.pages))

    def __len__(self) -> int:
        return len(self.pages)

    def page(self, n: int) -> Page:
        """1-based page lookup."""
        if not 1 <= n <= len(self.pages):
            raise IndexError(f"output of {self.input} has no page {n}")
        return self.pages[n - 1]

    def to_dict(self, write_body: BodyWriter | None = None) -> dict[str, Any]:
        return {"input": self.input, "pages": [p.to_dict(write_body) for p in self.pages]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], read_body: BodyReader | None = None) -> "OutputSequence":
        return cls(d["input"], tuple(Page.from_dict(p, read_body) for p in d["pages"]))


def _fp_to_json(fp: Fingerprint) -> list:
    return [fp[0], fp[1], [list(p) for p in fp[2]]]


def _fp_from_json(v: list) -> Fingerprint:
    return (v[0], v[1], tuple((a, b) for a, b in v[2]))


@dataclass(frozen=True)
class FailureRecord:
    relation: str
    source_inputs: tuple[InputSequence, ...]
    follow_up_inputs: tuple[InputSequence, ...]
    outputs: tuple[OutputSequence, ...]
    view_indices: Mapping[str, int]
    novel_requests: frozenset[Fingerprint]

    def __post_init__(self) -> None:
        if not self.novel_requests:
            raise ModelError("a reported failure must carry at least one novel request")
        object.__setattr__(self, "source_inputs", tuple(self.source_inputs))
        object.__setattr__(self, "follow_up_inputs", tuple(self.follow_up_inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "view_indices", dict(self.view_indices))
        object.__setattr__(self, "novel_requests", frozenset(self.novel_requests))

    def __hash__(self) -> int:
        return hash((self.relation, self.source_inputs, self.follow_up_inputs, self.novel_requests))

    def to_dict(self, write_body: BodyWriter | None = None) -> dict[str, Any]:
        return {
            "relation": self.relation,
            "view_indices": dict(sorted(self.view_indices.items())),
            "novel_requests": [_fp_to_json(fp) for fp in sorted(self.novel_requests)],
            "source_inputs": [s.to_dict() for s in self.source_inputs],
            "follow_up_inputs": [s.to_dict() for s in self.follow_up_inputs],
            "outputs": [o.to_dict(write_body) for o in self.outputs],
        }

    @classmethod
    def from_dict(
        cls,
        d: Mapping[str, Any],
        users: Mapping[str, User] | None = None,
        read_body: BodyReader | None = None,
    ) -> "FailureRecord":
        return cls(
            relation=d["relation"],
            source_inputs=tuple(InputSequence.from_dict(s, users) for s in d["source_inputs"]),
            follow_up_inputs=tuple(InputSequence.from_dict(s, users) for s in d["follow_up_inputs"]),
            outputs=tuple(OutputSequence.from_dict(o, read_body) for o in d["outputs"]),
            view_indices=dict(d["view_indices"]),
            novel_requests=frozenset(_fp_from_json(v) for v in d["novel_requests"]),
        )
