"""The data pool: everything collected about the target, and its on-disk form.

Directory layout::

    users.json          list of users
    graph.json          state graph per user id
    inputs.json         source input sequences, in pool order
    outputs/index.json  recorded output per input sequence
    outputs/<sha256>    page bodies, shared by graph.json and index.json
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from ..config import TargetConfig
from ..executor import HttpExecutor
from ..model import InputSequence, ModelError, OutputSequence, Page, Session, User
from .crawler import StateGraph, crawl
from .derive import derive_inputs, path_pages
from .script import ingest_script, with_recorded_sessions

log = logging.getLogger(__name__)


class PoolError(ValueError):
    pass


@dataclass
class DataPool:
    users: list[User]
    graphs: dict[str, StateGraph] = field(default_factory=dict)
    inputs: list[InputSequence] = field(default_factory=list)
    outputs: dict[str, OutputSequence] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._pages: dict[str, list[Page]] = {}

    def reachable_urls(self, user_id: str) -> set[str]:
        graph = self.graphs.get(user_id)
        return graph.reachable_urls() if graph else set()

    def recorded_pages(self, user_id: str) -> list[Page]:
        """Every page the user was served while collecting: crawl states, edges and outputs."""
        if user_id not in self._pages:
            pages: list[Page] = []
            graph = self.graphs.get(user_id)
            if graph:
                pages += [s.page for s in graph.states] + [e.page for e in graph.edges]
            for seq in self.inputs:
                if seq.user is not None and seq.user.id == user_id and seq.id in self.outputs:
                    pages += self.outputs[seq.id].pages
            seen, unique = set(), []
            for p in pages:
                if p.digest not in seen:
                    seen.add(p.digest)
                    unique.append(p)
            self._pages[user_id] = unique
        return self._pages[user_id]

    def sessions(self) -> list[Session]:
        out: list[Session] = []
        for seq in self.inputs:
            for a in seq.actions:
                if not a.session.anonymous and a.session not in out:
                    out.append(a.session)
        return out

    # -- persistence ---------------------------------------------------------

    def save(self, directory: str | Path) -> Path:
        """Write the pool to a new directory; an existing nonempty one is refused."""
        root = Path(directory)
        if root.exists() and (not root.is_dir() or any(root.iterdir())):
            raise PoolError(f"{root} exists and is not empty; pools are never overwritten")
        (root / "outputs").mkdir(parents=True, exist_ok=True)

        def write_body(body: bytes) -> str:
            page = Page(body, 200)
            rel = f"outputs/{page.digest}"
            target = root / rel
            if not target.exists():
                target.write_bytes(body)
            return rel

        _dump(root / "users.json", [u.to_dict() for u in self.users])
        _dump(root / "graph.json", {uid: g.to_dict(write_body) for uid, g in self.graphs.items()})
        _dump(root / "inputs.json", [s.to_dict() for s in self.inputs])
        _dump(root / "outputs" / "index.json", [self.outputs[s.id].to_dict(write_body) for s in self.inputs if s.id in self.outputs])
        return root

    @classmethod
    def load(cls, directory: str | Path) -> "DataPool":
        root = Path(directory)
        if not (root / "inputs.json").is_file():
            raise PoolError(f"{root} is not a data pool (inputs.json missing)")

        def read_body(rel: str) -> bytes:
            path = (root / rel).resolve()
            if root.resolve() not in path.parents:
                raise PoolError(f"body path escapes the pool: {rel}")
            return path.read_bytes()

        try:
            users = [User.from_dict(u) for u in _load(root / "users.json")]
            by_id = {u.id: u for u in users}
            graphs = {uid: StateGraph.from_dict(g, by_id, read_body) for uid, g in _load(root / "graph.json").items()}
            inputs = [InputSequence.from_dict(s, by_id) for s in _load(root / "inputs.json")]
            outputs = {}
            index = root / "outputs" / "index.json"
            if index.is_file():
                for o in _load(index):
                    out = OutputSequence.from_dict(o, read_body)
                    outputs[out.input] = out
        except (KeyError, TypeError, ModelError, OSError) as exc:
            raise PoolError(f"corrupt pool {root}: {exc}") from exc
        return cls(users, graphs, inputs, outputs)


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _load(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PoolError(f"{path}: {exc}") from exc


def collect(
    config: TargetConfig,
    budget: Optional[float] = None,
    scripts: Iterable[str | Path] = (),
    executor: Optional[HttpExecutor] = None,
) -> DataPool:
    """Crawl the target once per configured user, then run each manual script once.

    ``budget`` is the crawl time allowed per user.
    """
    ex = executor or HttpExecutor(config)
    pool = DataPool(list(config.users))
    for user in config.users:
        graph = crawl(config, user, budget, ex)
        pool.graphs[user.id] = graph
        for seq in derive_inputs(graph, user.id):
            pool.inputs.append(seq)
            pool.outputs[seq.id] = OutputSequence(seq.id, tuple(path_pages(graph, seq)))
        log.info("crawled %s: %d states, %d edges", user.id, len(graph.states), len(graph.edges))
    for path in list(scripts) + list(config.scripts):
        path = Path(path)
        seq = ingest_script(path.read_text(), config, f"script-{path.stem}")
        out = ex.execute(seq, fresh_session=True)
        seq = with_recorded_sessions(seq, out)
        pool.inputs.append(seq)
        pool.outputs[seq.id] = out
    return pool
