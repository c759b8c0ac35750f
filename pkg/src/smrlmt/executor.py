"""Replay input sequences against the system under test and record what comes back."""

from __future__ import annotations

import json
import logging
import os
from typing import IO, Iterable, Optional
from urllib.parse import urlsplit, urlunsplit

import requests

from .config import TargetConfig
from .model import Action, Fingerprint, InputSequence, OutputSequence, Page

log = logging.getLogger(__name__)

PROXY_ENV = "SMRLMT_PROXY"
_BODYLESS = {"GET", "HEAD", "OPTIONS", "DELETE"}


def record_requests(seq: InputSequence) -> set[Fingerprint]:
    """Request fingerprints ``(method, url, sorted params)`` that executing ``seq`` issues."""
    return seq.fingerprints()


def session_cookie(jar, name: str) -> str:
    value = ""
    for c in jar:
        if c.name == name:
            value = c.value or ""
    return value


class HttpExecutor:
    """Executes the actions of a sequence in order inside one cookie jar.

    The action's channel picks the origin: plain-channel actions aimed at the
    secure origin are sent to the configured insecure origin and vice versa.
    With ``tls = false`` the secure origin is reached over plain HTTP, which
    is how the local fixture emulates a secure port.
    """

    def __init__(
        self,
        config: TargetConfig,
        transcript: Optional[IO[str]] = None,
        proxy: Optional[str] = None,
    ):
        self.config = config
        self.transcript = transcript
        proxy = proxy if proxy is not None else os.environ.get(PROXY_ENV)
        self.proxies = {"http": proxy, "https": proxy} if proxy else None
        self._secure = urlsplit(config.base_url)
        self._insecure = urlsplit(config.insecure_url) if config.insecure_url else None
        self._shared: Optional[requests.Session] = None

    def new_session(self) -> requests.Session:
        s = requests.Session()
        s.max_redirects = self.config.max_redirects
        s.trust_env = False
        if self.proxies:
            s.proxies.update(self.proxies)
        return s

    def wire_url(self, action: Action) -> str:
        parts = urlsplit(action.url)
        netloc = parts.netloc
        secure_netloc = self._secure.netloc if self._secure.scheme == "https" else None
        if parts.scheme == "http" and self._insecure is not None and netloc == secure_netloc:
            netloc = self._insecure.netloc
        elif parts.scheme == "https" and self._insecure is not None and netloc == self._insecure.netloc:
            netloc = self._secure.netloc
        scheme = parts.scheme
        if scheme == "https" and not self.config.tls:
            scheme = "http"
        return urlunsplit((scheme, netloc, parts.path or "/", "", ""))

    def logical_url(self, wire: str) -> str:
        """Inverse of :meth:`wire_url`: the URL as the crawler should record it."""
        parts = urlsplit(wire)
        scheme = parts.scheme
        if parts.netloc == self._secure.netloc:
            scheme = self._secure.scheme
        elif self._insecure is not None and parts.netloc == self._insecure.netloc:
            scheme = "http"
        return urlunsplit((scheme, parts.netloc, parts.path or "/", parts.query, ""))

    def send(self, session: requests.Session, action: Action) -> Page:
        url = self.wire_url(action)
        params = list(action.query_params)
        data = list(action.form_data) or None
        if action.method in _BODYLESS and data:
            params += data
            data = None
        try:
            resp = session.request(
                action.method,
                url,
                params=params or None,
                data=data,
                headers=dict(action.headers) or None,
                timeout=(self.config.connect_timeout, self.config.read_timeout),
                allow_redirects=True,
            )
        except requests.RequestException as exc:
            log.debug("transport failure on %s %s: %s", action.method, url, exc)
            return Page(b"", 0, session_cookie(session.cookies, self.config.session_cookie), "", url)
        return Page(
            resp.content,
            resp.status_code,
            session_cookie(session.cookies, self.config.session_cookie),
            resp.headers.get("Content-Type", ""),
            resp.url,
        )

    def execute(self, seq: InputSequence, fresh_session: bool = True) -> OutputSequence:
        if fresh_session:
            session = self.new_session()
        else:
            if self._shared is None:
                self._shared = self.new_session()
            session = self._shared
        pages = []
        try:
            for i, action in enumerate(seq.actions, start=1):
                page = self.send(session, action)
                pages.append(page)
                self._log(seq, i, action, page)
        finally:
            if fresh_session:
                session.close()
        return OutputSequence(seq.id, tuple(pages))

    def _log(self, seq: InputSequence, pos: int, action: Action, page: Page) -> None:
        if self.transcript is None:
            return
        entry = {
            "input": seq.id,
            "position": pos,
            "method": action.method,
            "url": action.url,
            "wire_url": self.wire_url(action),
            "params": [list(p) for p in action.parameters],
            "status": page.status,
            "session_id": page.session_id,
            "body_sha256": page.digest,
        }
        self.transcript.write(json.dumps(entry, sort_keys=True) + "\n")


class RecordingExecutor:
    """Wraps another executor and remembers every sequence it was asked to run."""

    def __init__(self, inner):
        self.inner = inner
        self.calls: list[InputSequence] = []

    def execute(self, seq: InputSequence, fresh_session: bool = True) -> OutputSequence:
        self.calls.append(seq)
        return self.inner.execute(seq, fresh_session=fresh_session)

    def requests(self) -> list[Fingerprint]:
        return [a.fingerprint() for s in self.calls for a in s.actions]


def union_fingerprints(seqs: Iterable[InputSequence]) -> set[Fingerprint]:
    out: set[Fingerprint] = set()
    for s in seqs:
        out |= record_requests(s)
    return out
