"""Target configuration: where the system under test lives and how to judge its pages.

Loaded from a TOML file::

    [target]
    base_url = "https://127.0.0.1:8443"     # secure origin, crawl starts here
    insecure_url = "http://127.0.0.1:8080"  # plain-channel origin
    tls = false                             # secure port speaks plain HTTP (desk fixture)

    [[users]]
    username = "admin"
    password = "admin-pw"
    role = "admin"

    [oracle]
    error_patterns = ["(?i)error"]
    supervision = [["admin", "devel"]]

See README.md for every key.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional
from urllib.parse import urlsplit

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .distance import DEFAULT_THRESHOLD
from .model import User

DEFAULT_ERROR_PATTERNS = (r"(?i)error", r"(?i)forbidden", r"(?i)not\s+found", r"(?i)exception")
DEFAULT_LOGIN_PATTERN = "login|signin|session"
DEFAULT_SIGNUP_PATTERN = "signup|register"
DEFAULT_FORM_DEFAULTS = {
    "text": "test",
    "email": "test@example.com",
    "number": "1",
    "password": "test",
    "search": "test",
    "tel": "1",
    "url": "http://example.com",
    "textarea": "test",
}
IMAGE_EXTENSIONS = frozenset({"png", "jpg", "jpeg", "gif", "svg", "ico"})


class ConfigError(ValueError):
    pass


@dataclass
class TargetConfig:
    base_url: str
    insecure_url: Optional[str] = None
    tls: bool = True
    users: list[User] = field(default_factory=list)
    session_cookie: str = "SESSIONID"
    connect_timeout: float = 10.0
    read_timeout: float = 30.0
    max_redirects: int = 10
    error_patterns: tuple[str, ...] = DEFAULT_ERROR_PATTERNS
    error_status_floor: int = 400
    supervision: Optional[list[tuple[str, str]]] = None
    login_pattern: str = DEFAULT_LOGIN_PATTERN
    signup_pattern: str = DEFAULT_SIGNUP_PATTERN
    file_paths: list[str] = field(default_factory=list)
    file_aliases: list[tuple[str, str]] = field(default_factory=list)
    page_eq_threshold: float = DEFAULT_THRESHOLD
    state_eq_threshold: float = DEFAULT_THRESHOLD
    seed: int = 42
    random_views: int = 100
    crawl_budget: float = 120.0
    form_defaults: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_FORM_DEFAULTS))
    scripts: list[str] = field(default_factory=list)
    stateless: bool = False

    def __post_init__(self) -> None:
        for u in (self.base_url, self.insecure_url):
            if u is not None and urlsplit(u).scheme not in ("http", "https"):
                raise ConfigError(f"not an http(s) URL: {u!r}")
        try:
            self._error_res = [re.compile(p) for p in self.error_patterns]
            self._login_re = re.compile(self.login_pattern, re.I)
            self._signup_re = re.compile(self.signup_pattern, re.I)
        except re.error as exc:
            raise ConfigError(f"bad regular expression: {exc}") from exc
        if self.supervision is not None:
            names = {u.id for u in self.users}
            for pair in self.supervision:
                if len(pair) != 2:
                    raise ConfigError(f"supervision entries are [supervisor, supervised] pairs: {pair!r}")
                unknown = [p for p in pair if names and p not in names]
                if unknown:
                    raise ConfigError(f"supervision names unknown users: {unknown}")
            self.supervision = [tuple(p) for p in self.supervision]

    @property
    def error_regexes(self) -> list[re.Pattern]:
        return self._error_res

    @property
    def login_regex(self) -> re.Pattern:
        return self._login_re

    @property
    def signup_regex(self) -> re.Pattern:
        return self._signup_re

    def user(self, ident: str) -> User:
        for u in self.users:
            if ident in (u.id, u.username):
                return u
        raise ConfigError(f"unknown user {ident!r}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], root: Path | None = None) -> "TargetConfig":
        root = root or Path(".")
        target = dict(data.get("target", {}))
        if "base_url" not in target:
            raise ConfigError("[target] base_url is required")
        oracle = dict(data.get("oracle", {}))
        detect = dict(data.get("detection", {}))
        files = dict(data.get("files", {}))
        thresholds = dict(data.get("thresholds", {}))
        crawl = dict(data.get("crawl", {}))

        users = []
        for i, u in enumerate(data.get("users", [])):
            try:
                users.append(User(u.get("id", u["username"]), u["username"], u["password"], u.get("role", "")))
            except KeyError as exc:
                raise ConfigError(f"user #{i + 1} lacks {exc.args[0]}") from None
        if len({u.id for u in users}) != len(users):
            raise ConfigError("user ids must be unique")

        paths = [str(p) for p in files.get("paths", [])]
        if "corpus" in files:
            paths += read_path_corpus(root / files["corpus"])
        aliases = [tuple(a) for a in files.get("aliases", [])]
        if "scan_dir" in files:
            paths += scan_document_root(root / files["scan_dir"], aliases)

        kwargs: dict[str, Any] = dict(
            base_url=target["base_url"],
            insecure_url=target.get("insecure_url"),
            tls=bool(target.get("tls", True)),
            users=users,
            session_cookie=target.get("session_cookie", "SESSIONID"),
            connect_timeout=float(target.get("connect_timeout", 10.0)),
            read_timeout=float(target.get("read_timeout", 30.0)),
            stateless=bool(target.get("stateless", False)),
            supervision=oracle.get("supervision"),
            file_paths=paths,
            file_aliases=aliases,
            scripts=[str(root / s) for s in crawl.get("scripts", [])],
        )
        if "error_patterns" in oracle:
            kwargs["error_patterns"] = tuple(oracle["error_patterns"])
        if "error_status_floor" in oracle:
            kwargs["error_status_floor"] = int(oracle["error_status_floor"])
        if "login_pattern" in detect:
            kwargs["login_pattern"] = detect["login_pattern"]
        if "signup_pattern" in detect:
            kwargs["signup_pattern"] = detect["signup_pattern"]
        if "page_eq" in thresholds:
            kwargs["page_eq_threshold"] = float(thresholds["page_eq"])
        if "state_eq" in thresholds:
            kwargs["state_eq_threshold"] = float(thresholds["state_eq"])
        if "random_views" in thresholds:
            kwargs["random_views"] = int(thresholds["random_views"])
        if "seed" in data.get("rng", {}):
            kwargs["seed"] = int(data["rng"]["seed"])
        if "budget" in crawl:
            kwargs["crawl_budget"] = float(crawl["budget"])
        if "form_defaults" in crawl:
            kwargs["form_defaults"] = {**DEFAULT_FORM_DEFAULTS, **crawl["form_defaults"]}
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "TargetConfig":
        path = Path(path)
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_mapping(data, path.parent)


def read_path_corpus(path: Path) -> list[str]:
    """One file path per line; blank lines and ``#`` comments skipped."""
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read file-path corpus {path}: {exc}") from exc
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]


def scan_document_root(root: Path, aliases: list[tuple[str, str]] = ()) -> list[str]:
    """Relative paths of the files under ``root``, skipping images.

    ``aliases`` rewrites leading path components, e.g. ``("plugins", "plugin")``
    for a server that exposes a directory under a different name.
    """
    if not root.is_dir():
        raise ConfigError(f"document root {root} is not a directory")
    mapping = dict(aliases)
    out = []
    for p in sorted(root.rglob("*")):
        if not p.is_file() or p.suffix.lower().lstrip(".") in IMAGE_EXTENSIONS:
            continue
        parts = list(p.relative_to(root).parts)
        parts = [mapping.get(c, c) for c in parts]
        out.append("/".join(parts))
    return out
