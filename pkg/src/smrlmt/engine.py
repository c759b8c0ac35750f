"""Run a relation over every combination of data-pool views and collect its failures."""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from . import __version__
from .config import TargetConfig
from .distance import DEFAULT_THRESHOLD
from .interp.compiler import POOLED_TYPES, CompiledRelation, ExecutionContext
from .interp.values import ProviderError, action_refs
from .model import FailureRecord, Fingerprint

log = logging.getLogger(__name__)

HTTP_METHODS = ("GET", "POST", "PUT", "DELETE", "HEAD", "OPTIONS", "PATCH")
RANDOM_VIEWS = 100
DEFAULT_BUDGET = 24 * 3600.0
# keys whose values depend on the wall clock
TIME_KEYS = frozenset({"started_at", "finished_at", "elapsed_seconds"})


class DataProvider:
    """Circular views over one ordered pool per input type.

    View ``k`` of a pool of N items is the pool rotated left by ``k``: item
    ``i`` (1-based) is ``pool[(k + i - 1) % N]``.
    """

    def __init__(self, pools: Mapping[str, Sequence[Any]], seed: int = 42):
        self.pools = {name: list(items) for name, items in pools.items()}
        self.seed = seed
        self.offsets = {name: 0 for name in self.pools}
        self._served = {name: 0 for name in self.pools}

    @classmethod
    def from_pool(cls, pool, config: TargetConfig, seed: Optional[int] = None) -> "DataProvider":
        """Pools for every input type from a collected :class:`DataPool`."""
        seed = config.seed if seed is None else seed
        rng = random.Random(seed)
        paths = list(config.file_paths)
        n = config.random_views
        pools = {
            "Input": list(pool.inputs),
            "User": list(pool.users),
            "Session": pool.sessions(),
            "Action": [ref for seq in pool.inputs for ref in action_refs(seq)],
            "HttpMethod": list(HTTP_METHODS),
            "RandomFilePath": [rng.choice(paths) for _ in range(n)] if paths else [],
            # one entry per view; the values themselves come from the per-view rng
            "RandomValue": list(range(n)),
        }
        return cls(pools, seed)

    def size(self, name: str) -> int:
        return len(self._pool(name))

    def _pool(self, name: str) -> list:
        if name not in self.pools:
            raise ProviderError(f"no pool for {name}")
        return self.pools[name]

    def item(self, name: str, index: int) -> Any:
        pool = self._pool(name)
        if not 1 <= index <= len(pool):
            raise ProviderError(f"{name}({index}) requested but the {name} pool holds {len(pool)} items")
        return pool[(self.offsets[name] + index - 1) % len(pool)]

    def view(self, name: str) -> list:
        pool = self._pool(name)
        k = self.offsets[name]
        return pool[k:] + pool[:k]

    def has_more_views(self, name: str) -> bool:
        return self._served[name] < len(self._pool(name))

    def next_view(self, name: str) -> None:
        pool = self._pool(name)
        self.offsets[name] = (self.offsets[name] + 1) % len(pool)
        self._served[name] += 1

    def reset_views(self, name: str) -> None:
        self._pool(name)
        self._served[name] = 0

    def view_indices(self, names: Iterable[str] | None = None) -> dict[str, int]:
        names = self.pools if names is None else names
        return {n: self.offsets[n] for n in names}

    def at(self, offsets: Mapping[str, int]) -> "DataProvider":
        """A copy positioned on the given views; used to shard a campaign."""
        clone = DataProvider.__new__(DataProvider)
        clone.pools = self.pools
        clone.seed = self.seed
        clone.offsets = dict(self.offsets)
        clone.offsets.update(offsets)
        clone._served = dict(self._served)
        return clone

    def rng_seed(self, seed: int) -> int:
        """Seed for one MR.run, derived from ``seed`` and the current views."""
        key = json.dumps([seed, sorted(self.offsets.items())])
        return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def extract_source_input_types(rel: CompiledRelation) -> list[str]:
    return sorted(t for t in rel.referenced_input_types if t in POOLED_TYPES)


@dataclass
class CampaignResult:
    relation: str
    runs: int = 0
    raw_failures: int = 0
    failures: list[FailureRecord] = field(default_factory=list)
    truncated: bool = False
    errors: list[dict[str, Any]] = field(default_factory=list)
    # requests of every raw failure, kept to check that dedup loses none
    raw_requests: set[Fingerprint] = field(default_factory=set)
    started_at: str = ""
    finished_at: str = ""
    elapsed_seconds: float = 0.0

    def to_dict(self, write_body=None) -> dict[str, Any]:
        return {
            "relation": self.relation,
            "runs": self.runs,
            "raw_failures": self.raw_failures,
            "reported_failures": len(self.failures),
            "truncated": self.truncated,
            "errors": list(self.errors),
            "failures": [f.to_dict(write_body) for f in self.failures],
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


def failure_requests(ctx: ExecutionContext) -> set[Fingerprint]:
    """Requests a failing run is blamed for: its follow-up inputs, or its sources when it built none."""
    seqs = ctx.follow_up_inputs() or ctx.source_inputs()
    out: set[Fingerprint] = set()
    for s in seqs:
        out |= s.fingerprints()
    return out


def add_failure(result: CampaignResult, rel_name: str, ctx: ExecutionContext, views: Mapping[str, int]) -> bool:
    """Record the failure unless all its requests were already covered by reported ones."""
    result.raw_failures += 1
    requests = failure_requests(ctx)
    result.raw_requests |= requests
    seen: set[Fingerprint] = set()
    for f in result.failures:
        seen |= f.novel_requests
    novel = requests - seen
    # a run that touched no input has nothing to report, however it failed
    if not novel:
        return False
    outputs = [ctx.output_cache[k] for k in sorted(ctx.output_cache)]
    result.failures.append(
        FailureRecord(
            relation=rel_name,
            source_inputs=tuple(ctx.source_inputs()),
            follow_up_inputs=tuple(ctx.follow_up_inputs()),
            outputs=tuple(outputs),
            view_indices=dict(views),
            novel_requests=frozenset(novel),
        )
    )
    return True


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def execute_metamorphic_testing(
    rel: CompiledRelation,
    provider: DataProvider,
    executor,
    functions: Mapping[str, Callable],
    budget: float = DEFAULT_BUDGET,
    seed: int = 42,
    page_eq_threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
    clock: Callable[[], float] = time.monotonic,
) -> CampaignResult:
    """Invoke ``rel`` once per combination of views of the pools it reads.

    Types are visited in lexicographic order; the first one is the outermost.
    The budget is checked between runs, so a run in progress always completes.
    ``workers > 1`` evaluates combinations concurrently and must only be used
    against targets whose responses do not depend on earlier requests.
    """
    types = extract_source_input_types(rel)
    for t in types:
        if provider.size(t) == 0:
            raise ProviderError(f"the {t} pool is empty")
    result = CampaignResult(rel.name, started_at=_now())
    start = clock()
    deadline = start + budget
    functions = dict(functions)

    def run_once(p: DataProvider):
        verdict, ctx = rel.run(p, executor, functions, seed=seed, page_eq_threshold=page_eq_threshold)
        return verdict, ctx

    if workers > 1:
        _run_parallel(rel, provider, types, run_once, result, deadline, clock, workers)
    else:

        def iterate(i: int) -> bool:
            if i == len(types):
                if clock() > deadline:
                    result.truncated = True
                    return False
                verdict, ctx = run_once(provider)
                result.runs += 1
                if not verdict:
                    add_failure(result, rel.name, ctx, provider.view_indices(types))
                return True
            t = types[i]
            provider.reset_views(t)
            while provider.has_more_views(t):
                if not iterate(i + 1):
                    return False
                provider.next_view(t)
            return True

        iterate(0)
    result.elapsed_seconds = clock() - start
    result.finished_at = _now()
    if result.truncated:
        log.warning("%s: budget exhausted after %d runs", rel.name, result.runs)
    return result


def _run_parallel(rel, provider, types, run_once, result, deadline, clock, workers) -> None:
    combos = list(itertools.product(*(range(provider.size(t)) for t in types)))

    def job(combo):
        if clock() > deadline:
            return None
        p = provider.at(dict(zip(types, combo)))
        verdict, ctx = run_once(p)
        return verdict, ctx, p.view_indices(types)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        # failures are folded in combination order, so dedup matches a sequential run
        for out in pool.map(job, combos):
            if out is None:
                result.truncated = True
                continue
            verdict, ctx, views = out
            result.runs += 1
            if not verdict:
                add_failure(result, rel.name, ctx, views)


# -- reports -------------------------------------------------------------------


def campaign_report(results: Sequence[CampaignResult], meta: Mapping[str, Any], body_dir: Optional[Path] = None) -> dict:
    """One JSON-ready document for a campaign over one or more relations.

    Page bodies are written under ``body_dir`` (named by digest) when given and
    referenced by relative path; otherwise they are left out of the report.
    """

    def write_body(body: bytes) -> str:
        digest = hashlib.sha256(body).hexdigest()
        if body_dir is None:
            return f"sha256:{digest}"
        body_dir.mkdir(parents=True, exist_ok=True)
        target = body_dir / digest
        if not target.exists():
            target.write_bytes(body)
        return f"{body_dir.name}/{digest}"

    rels = [r.to_dict(write_body) for r in results]
    return {
        "tool": "smrlmt",
        "version": __version__,
        **dict(meta),
        "started_at": min((r.started_at for r in results), default=""),
        "finished_at": max((r.finished_at for r in results), default=""),
        "relations": rels,
        "summary": {
            "relations": len(results),
            "runs": sum(r.runs for r in results),
            "raw_failures": sum(r.raw_failures for r in results),
            "reported_failures": sum(len(r.failures) for r in results),
            "truncated": any(r.truncated for r in results),
        },
    }


def write_report(report: Mapping[str, Any], path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")


def strip_timestamps(obj):
    """Copy of a report without wall-clock fields, for reproducibility checks."""
    if isinstance(obj, dict):
        return {k: strip_timestamps(v) for k, v in obj.items() if k not in TIME_KEYS}
    if isinstance(obj, list):
        return [strip_timestamps(v) for v in obj]
    return obj


def render_summary(report: Mapping[str, Any]) -> str:
    rows = [("relation", "runs", "raw", "reported", "truncated")]
    for r in report["relations"]:
        rows.append(
            (r["relation"], str(r["runs"]), str(r["raw_failures"]), str(r["reported_failures"]), "yes" if r["truncated"] else "no")
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    s = report["summary"]
    lines.append("")
    lines.append(f"{s['reported_failures']} failure(s) reported from {s['raw_failures']} raw over {s['runs']} run(s)")
    for r in report["relations"]:
        for i, f in enumerate(r["failures"], start=1):
            urls = sorted({fp[1] for fp in f["novel_requests"]})
            views = ", ".join(f"{k}={v}" for k, v in f["view_indices"].items())
            lines.append(f"  {r['relation']} #{i} [{views}] {' '.join(urls)}")
    return "\n".join(lines)


