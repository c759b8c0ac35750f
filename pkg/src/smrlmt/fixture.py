"""A small, deterministic, deliberately vulnerable Web application.

It plays a build server with three roles (admin, devel, tester) and is served
on two local ports: a plain one and one labelled secure. Four toggles seed the
vulnerabilities the catalog relations look for:

V1  bypass authorization: ``/admin/startSlave`` answers any signed-in user
V2  plain-channel login: ``POST /login`` succeeds on the plain port
V3  directory traversal: ``/download`` serves any path it knows about
V4  session fixation: signing up keeps the current session id

With every toggle off the application enforces roles, refuses logins on the
plain port, confines downloads to a whitelist and rotates the session id on
signup. Bodies never contain timestamps or nonces; session ids come from a
counter, so :meth:`FixtureServer.reset` restores a byte-identical replay.

Never expose this server beyond localhost.
"""

from __future__ import annotations

import hashlib
import html
import logging
import posixpath
import threading
from dataclasses import dataclass, field
from http.cookies import SimpleCookie
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Iterable, Optional
from urllib.parse import parse_qsl, urlsplit

from .config import TargetConfig
from .model import User

log = logging.getLogger(__name__)

VULNERABILITIES = ("V1", "V2", "V3", "V4")
COOKIE = "SESSIONID"

ACCOUNTS = {
    "admin": ("admin-pw", "admin"),
    "devel": ("devel-pw", "devel"),
    "tester": ("tester-pw", "tester"),
}

PAGE_ROLES = {
    "/stats": {"admin", "devel"},
    "/admin": {"admin"},
    "/admin/users": {"admin"},
    "/admin/startSlave": {"admin"},
    "/devel/builds": {"admin", "devel"},
    "/tester/reports": {"admin", "tester"},
}

ROLE_LINKS = {
    "admin": [
        ("/admin", "Administration console"),
        ("/stats", "Build statistics"),
        ("/devel/builds", "Developer builds"),
        ("/tester/reports", "Test reports"),
    ],
    "devel": [("/stats", "Build statistics"), ("/devel/builds", "Developer builds")],
    "tester": [("/tester/reports", "Test reports")],
}
COMMON_LINKS = [
    ("/profile", "Your profile"),
    ("/download?path=docs/manual.txt", "User manual"),
    ("/download?path=docs/changelog.txt", "Changelog"),
    ("/logout", "Sign out"),
]

WHITELIST = ("docs/manual.txt", "docs/changelog.txt")

FILES = {
    "docs/manual.txt": (
        "BUILD SERVER USER MANUAL\n"
        "1. Sign in with the credentials handed out by your administrator.\n"
        "2. Developers queue builds from the developer builds page.\n"
        "3. Testers collect results from the test reports page.\n"
        "4. Administrators manage agents and accounts from the console.\n"
    ),
    "docs/changelog.txt": (
        "CHANGELOG\n"
        "v2.3.0  agents reconnect automatically after a network outage\n"
        "v2.2.1  build statistics show median queue time per project\n"
        "v2.2.0  testers may attach log archives to their reports\n"
        "v2.1.0  first public release of the build server\n"
    ),
    "etc/passwd": (
        "root:x:0:0:root:/root:/bin/bash\n"
        "daemon:x:1:1:daemon:/usr/sbin:/usr/sbin/nologin\n"
        "buildsrv:x:998:998:build server service account:/var/lib/buildsrv:/bin/sh\n"
        "postgres:x:997:997:PostgreSQL administrator:/var/lib/postgresql:/bin/bash\n"
    ),
    "config/secrets.yml": (
        "database:\n"
        "  user: buildsrv\n"
        "  password: hunter2-very-secret\n"
        "signing_key: 3f9a1c77be02d45e8810aa9c6d2b1e07\n"
        "agents:\n"
        "  shared_token: agt-5d1e0c9b8a7f6e5d4c3b2a19\n"
    ),
    "WEB-INF/web.xml": (
        "<web-app>\n"
        "  <display-name>buildsrv</display-name>\n"
        "  <context-param><param-name>adminToken</param-name>"
        "<param-value>adm-0a1b2c3d4e5f</param-value></context-param>\n"
        "  <servlet><servlet-name>agents</servlet-name><servlet-class>Agents</servlet-class></servlet>\n"
        "</web-app>\n"
    ),
}

# file paths a tester would feed to RandomFilePath for this application
PATH_CORPUS = (
    "docs/manual.txt",
    "docs/changelog.txt",
    "etc/passwd",
    "../../etc/passwd",
    "config/secrets.yml",
    "WEB-INF/web.xml",
)


def _layout(title: str, content: str, links: Iterable[tuple[str, str]] = ()) -> bytes:
    nav = "".join(f'<li><a href="{html.escape(h)}">{html.escape(t)}</a></li>' for h, t in links)
    nav = f"<ul>{nav}</ul>" if nav else ""
    doc = (
        "<!DOCTYPE html>\n<html><head><title>"
        + html.escape(title)
        + "</title></head>\n<body>\n<h1>"
        + html.escape(title)
        + "</h1>\n"
        + content
        + "\n"
        + nav
        + "\n<p>Build server demo application.</p>\n</body></html>\n"
    )
    return doc.encode("utf-8")


@dataclass
class Response:
    status: int
    body: bytes = b""
    headers: list[tuple[str, str]] = field(default_factory=list)
    content_type: str = "text/html; charset=utf-8"


class FixtureApp:
    """Request handling, independent of the socket layer."""

    def __init__(self, vulns: Iterable[str] = (), seed: int = 0):
        vulns = {v.upper() for v in vulns}
        unknown = vulns - set(VULNERABILITIES)
        if unknown:
            raise ValueError(f"unknown vulnerability toggles: {sorted(unknown)}")
        self.vulns = frozenset(vulns)
        self.seed = seed
        self.lock = threading.Lock()
        self.reset()

    def reset(self) -> None:
        with self.lock:
            self.counter = 0
            self.sessions: dict[str, str] = {}
            self.accounts = dict(ACCOUNTS)

    def _new_sid(self) -> str:
        self.counter += 1
        return hashlib.sha256(f"{self.seed}:{self.counter}".encode()).hexdigest()[:24]

    def _cookie(self, sid: str) -> tuple[str, str]:
        return ("Set-Cookie", f"{COOKIE}={sid}; Path=/; HttpOnly")

    def handle(self, method: str, target: str, form: dict[str, str], cookies: dict[str, str], secure: bool) -> Response:
        with self.lock:
            return self._handle(method, target, form, cookies, secure)

    def _handle(self, method, target, form, cookies, secure) -> Response:
        parts = urlsplit(target)
        path = parts.path or "/"
        query = dict(parse_qsl(parts.query, keep_blank_values=True))
        sid = cookies.get(COOKIE, "")
        user = self.sessions.get(sid)
        role = self.accounts[user][1] if user in self.accounts else None

        if path == "/" and method in ("GET", "HEAD"):
            return Response(200, self.login_page())
        if path == "/login" and method == "POST":
            return self.login(form, secure)
        if path == "/signup":
            if method == "POST":
                return self.signup(form, sid)
            return Response(200, self.signup_page())
        if path == "/logout":
            self.sessions.pop(sid, None)
            return Response(302, headers=[("Location", "/"), ("Set-Cookie", f"{COOKIE}=; Path=/; Max-Age=0")])

        if path not in PAGE_ROLES and path not in ("/home", "/profile", "/download"):
            return self.error(404, "Page not found", "The page you asked for does not exist on this server.")
        if user is None:
            return Response(302, headers=[("Location", "/")])

        allowed = PAGE_ROLES.get(path)
        if path == "/admin/startSlave" and "V1" in self.vulns:
            allowed = None
        if allowed is not None and role not in allowed:
            return self.forbidden()

        if path == "/home":
            return Response(200, self.home(user, role))
        if path == "/profile":
            return Response(200, self.profile(user, role))
        if path == "/download":
            return self.download(query.get("path", ""))
        return Response(200, STATIC_PAGES[path]())

    def error(self, status: int, title: str, text: str) -> Response:
        body = _layout(title, f"<p>Error {status}. {html.escape(text)}</p>", [("/", "Back to the sign-in page")])
        return Response(status, body)

    def forbidden(self) -> Response:
        return self.error(403, "Forbidden", "Your role is not allowed to open this page; ask an administrator.")

    def login_page(self) -> bytes:
        form = (
            '<form name="login" action="/login" method="post">\n'
            '<label>User <input type="text" name="username"></label>\n'
            '<label>Password <input type="password" name="password"></label>\n'
            '<input type="submit" value="Sign in">\n</form>\n'
            "<p>Sign in to queue builds, read test reports and manage build agents.</p>"
        )
        return _layout("Sign in", form, [("/signup", "Create an account")])

    def signup_page(self) -> bytes:
        form = (
            '<form name="signup" action="/signup" method="post">\n'
            '<label>Choose a user name <input type="text" name="username"></label>\n'
            '<label>Choose a password <input type="password" name="password"></label>\n'
            '<input type="submit" value="Register">\n</form>\n'
            "<p>New accounts can read the manual and the changelog and keep a personal profile.</p>"
        )
        return _layout("Create an account", form, [("/", "Back to the sign-in page")])

    def login(self, form: dict[str, str], secure: bool) -> Response:
        if not secure and "V2" not in self.vulns:
            return self.error(
                403,
                "Insecure channel refused",
                "Credentials are only accepted over the secure channel; the login was rejected.",
            )
        username, password = form.get("username", ""), form.get("password", "")
        account = self.accounts.get(username)
        if account is None or account[0] != password:
            return self.error(401, "Login error", "The user name or the password is wrong.")
        sid = self._new_sid()
        self.sessions[sid] = username
        return Response(302, headers=[("Location", "/home"), self._cookie(sid)])

    def signup(self, form: dict[str, str], sid: str) -> Response:
        username, password = form.get("username", ""), form.get("password", "")
        if not username or username in ACCOUNTS:
            return self.error(409, "Registration error", "That user name cannot be registered.")
        self.accounts[username] = (password, "user")
        if sid and sid in self.sessions and "V4" in self.vulns:
            new_sid = sid
        else:
            self.sessions.pop(sid, None)
            new_sid = self._new_sid()
        self.sessions[new_sid] = username
        body = _layout(
            "Registration complete",
            "<p>Your account is ready. Sign in again from the start page to use the build server.</p>",
            [("/", "Go to the sign-in page")],
        )
        return Response(200, body, [self._cookie(new_sid)])

    def home(self, user: str, role: Optional[str]) -> bytes:
        links = ROLE_LINKS.get(role or "", []) + COMMON_LINKS
        text = (
            f"<p>Signed in as {html.escape(user)}.</p>"
            f"<p>Dashboard for the {html.escape(role or 'user')} role: pick one of the areas below.</p>"
        )
        return _layout("Dashboard", text, links)

    def profile(self, user: str, role: Optional[str]) -> bytes:
        text = (
            f"<p>Account name: {html.escape(user)}</p><p>Role: {html.escape(role or 'user')}</p>"
            "<p>Notification e-mails are sent for failed builds of projects you follow.</p>"
        )
        return _layout("Profile", text, [("/home", "Dashboard")])

    def download(self, raw: str) -> Response:
        path = posixpath.normpath("/" + raw).lstrip("/")
        if raw in WHITELIST or (path in WHITELIST and "V3" in self.vulns):
            return Response(200, FILES[path].encode(), content_type="text/plain; charset=utf-8")
        if "V3" in self.vulns:
            if path in FILES:
                return Response(200, FILES[path].encode(), content_type="text/plain; charset=utf-8")
            return self.error(404, "File not found", "No file with that name is available for download.")
        return self.forbidden()


def _static(title: str, text: str, links=(("/home", "Dashboard"),)):
    return lambda: _layout(title, text, links)


STATIC_PAGES = {
    "/stats": _static(
        "Build statistics",
        "<table><tr><th>Project</th><th>Builds</th><th>Median queue</th></tr>"
        "<tr><td>core</td><td>412</td><td>38 s</td></tr><tr><td>web-ui</td><td>187</td><td>52 s</td></tr>"
        "<tr><td>agents</td><td>95</td><td>41 s</td></tr></table>",
    ),
    "/admin": _static(
        "Administration console",
        "<p>Manage the build agents and the user accounts of this server.</p>",
        (("/admin/startSlave", "Start a build agent"), ("/admin/users", "User accounts"), ("/home", "Dashboard")),
    ),
    "/admin/users": _static(
        "User accounts",
        "<table><tr><th>Name</th><th>Role</th></tr><tr><td>admin</td><td>admin</td></tr>"
        "<tr><td>devel</td><td>devel</td></tr><tr><td>tester</td><td>tester</td></tr></table>",
    ),
    "/admin/startSlave": _static(
        "Start a build agent",
        "<p>Agent agent-07 was started and joined the pool; it will accept jobs for every project "
        "once its workspace has been synchronised with the master node.</p>",
    ),
    "/devel/builds": _static(
        "Developer builds",
        "<ol><li>core #412 passed in 6 min</li><li>web-ui #187 passed in 9 min</li>"
        "<li>agents #95 queued behind two jobs</li></ol>",
    ),
    "/tester/reports": _static(
        "Test reports",
        "<dl><dt>Regression suite</dt><dd>1204 tests, 3 flaky, 0 failing</dd>"
        "<dt>Smoke suite</dt><dd>86 tests, all green</dd></dl>",
    ),
}


class _Handler(BaseHTTPRequestHandler):
    server_version = "fixture/1.0"
    sys_version = ""

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.server.label, *args)

    def _dispatch(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length).decode("utf-8", "replace") if length else ""
        form = dict(parse_qsl(raw, keep_blank_values=True))
        cookies = {}
        if self.headers.get("Cookie"):
            jar = SimpleCookie()
            jar.load(self.headers["Cookie"])
            cookies = {k: m.value for k, m in jar.items()}
        resp = self.server.app.handle(self.command, self.path, form, cookies, self.server.secure)
        self.send_response(resp.status)
        for k, v in resp.headers:
            self.send_header(k, v)
        self.send_header("Content-Type", resp.content_type)
        self.send_header("Content-Length", str(len(resp.body)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(resp.body)

    do_GET = do_POST = do_HEAD = do_PUT = do_DELETE = do_OPTIONS = do_PATCH = _dispatch


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, app: FixtureApp, secure: bool):
        super().__init__(addr, _Handler)
        self.app = app
        self.secure = secure
        self.label = "secure" if secure else "plain"


class FixtureServer:
    """Both listeners of a running fixture; use as a context manager or call ``stop``."""

    def __init__(self, app: FixtureApp, host: str = "127.0.0.1", port: int = 0, secure_port: int = 0):
        self.app = app
        self.host = host
        self._plain = _Server((host, port), app, secure=False)
        try:
            self._secure = _Server((host, secure_port), app, secure=True)
        except OSError:
            self._plain.server_close()
            raise
        self._threads = [
            threading.Thread(target=s.serve_forever, name=f"fixture-{s.label}", daemon=True)
            for s in (self._plain, self._secure)
        ]
        for t in self._threads:
            t.start()

    @property
    def port(self) -> int:
        return self._plain.server_address[1]

    @property
    def secure_port(self) -> int:
        return self._secure.server_address[1]

    @property
    def insecure_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def secure_url(self) -> str:
        return f"https://{self.host}:{self.secure_port}"

    def reset(self) -> None:
        self.app.reset()

    def stop(self) -> None:
        for s in (self._plain, self._secure):
            s.shutdown()
            s.server_close()

    def __enter__(self) -> "FixtureServer":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    def target_config(self, **overrides) -> TargetConfig:
        """A configuration pointing at this fixture with its three accounts."""
        users = [User(name, name, pw, role) for name, (pw, role) in ACCOUNTS.items()]
        kwargs = dict(
            base_url=self.secure_url,
            insecure_url=self.insecure_url,
            tls=False,
            users=users,
            session_cookie=COOKIE,
            file_paths=list(PATH_CORPUS),
            crawl_budget=60.0,
        )
        kwargs.update(overrides)
        return TargetConfig(**kwargs)

    def target_toml(self) -> str:
        lines = [
            "[target]",
            f'base_url = "{self.secure_url}"',
            f'insecure_url = "{self.insecure_url}"',
            "tls = false",
            f'session_cookie = "{COOKIE}"',
            "",
            "[files]",
            "paths = [" + ", ".join(f'"{p}"' for p in PATH_CORPUS) + "]",
            "",
        ]
        for name, (pw, role) in ACCOUNTS.items():
            lines += ["[[users]]", f'username = "{name}"', f'password = "{pw}"', f'role = "{role}"', ""]
        return "\n".join(lines)


def serve_fixture(
    vulns: Iterable[str] = (), port: int = 0, secure_port: int = 0, host: str = "127.0.0.1", seed: int = 0
) -> FixtureServer:
    """Start the fixture on ``port`` (plain) and ``secure_port``; 0 picks free ports."""
    return FixtureServer(FixtureApp(vulns, seed), host, port, secure_port)
