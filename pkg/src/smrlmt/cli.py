"""Command-line entry point.

Exit status: 0 on success, 1 when ``test`` finds relation failures, 2 on
usage, configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import signal
import sys
import threading
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .catalog import STUBS, catalog_files, load_catalog
from .collector import CrawlError, DataPool, PoolError, ScriptParseError, collect
from .config import ConfigError, TargetConfig
from .dsl import CheckFailed, SmrlError, check_all, parse, tokenize
from .engine import (
    DEFAULT_BUDGET,
    DataProvider,
    campaign_report,
    execute_metamorphic_testing,
    render_summary,
    write_report,
)
from .executor import HttpExecutor
from .fixture import VULNERABILITIES, serve_fixture
from .interp import ProviderError, WebLibrary, compile_relation

log = logging.getLogger("smrlmt")

EXIT_OK, EXIT_FAILURES, EXIT_USAGE = 0, 1, 2
TEST_BUDGET = 600.0
_DURATION = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([smhd]?)\s*$")
_UNITS = {"": 1, "s": 1, "m": 60, "h": 3600, "d": 86400}


class UsageError(Exception):
    pass


def parse_duration(text: str) -> float:
    """``90``, ``90s``, ``10m``, ``24h`` or ``1d`` as seconds."""
    m = _DURATION.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"not a duration: {text!r} (try 90s, 10m, 24h)")
    return float(m.group(1)) * _UNITS[m.group(2)]


def _diagnostics(path: Path) -> list[str]:
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    try:
        rels = parse(tokenize(source))
    except SmrlError as exc:
        return [exc.format(str(path))]
    return [e.format(str(path)) for e in check_all(rels)]


def cmd_check(args) -> int:
    bad = False
    for name in args.files:
        for line in _diagnostics(Path(name)):
            print(line)
            bad = True
    return EXIT_USAGE if bad else EXIT_OK


def cmd_crawl(args) -> int:
    config = TargetConfig.load(args.target)
    out = Path(args.out)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise UsageError(f"{out} exists and is not empty; choose a fresh pool directory")
    pool = collect(config, budget=args.budget, scripts=args.script or ())
    pool.save(out)
    for uid, graph in pool.graphs.items():
        note = " (budget exhausted)" if graph.truncated else ""
        print(f"{uid}: {len(graph.states)} states, {len(graph.edges)} edges{note}")
    print(f"{len(pool.inputs)} input sequences written to {out}")
    return EXIT_OK


def _relations(specs: Sequence[str]):
    catalog = load_catalog()
    if not specs:
        return [catalog[n] for n in sorted(catalog)]
    out = []
    for entry in specs:
        for item in entry.split(","):
            item = item.strip()
            if not item:
                continue
            if item in catalog:
                out.append(catalog[item])
                continue
            path = Path(item)
            if not path.is_file():
                known = ", ".join(sorted(catalog))
                raise UsageError(f"{item}: neither a relation file nor a catalog relation ({known})")
            source = path.read_text(encoding="utf-8")
            try:
                rels = parse(tokenize(source))
            except SmrlError as exc:
                raise UsageError(exc.format(str(path))) from None
            errors = check_all(rels)
            if errors:
                raise UsageError("\n".join(e.format(str(path)) for e in errors))
            out.extend(rels)
    return out


def cmd_test(args) -> int:
    config = TargetConfig.load(args.target)
    if args.page_eq_threshold is not None:
        config.page_eq_threshold = args.page_eq_threshold
    seed = config.seed if args.seed is None else args.seed
    pool = DataPool.load(args.pool)
    relations = [compile_relation(r) for r in _relations(args.relations)]
    if args.workers > 1 and not config.stateless:
        raise UsageError("--workers > 1 needs a target declared stateless in its configuration")
    transcript = None
    if args.transcript:
        transcript = open(args.transcript, "w", encoding="utf-8")
    elif args.verbose:
        transcript = sys.stderr
    try:
        executor = HttpExecutor(config, transcript=transcript)
        functions = WebLibrary(pool, config).functions()
        results = []
        for rel in relations:
            provider = DataProvider.from_pool(pool, config, seed)
            log.info("running %s", rel.name)
            results.append(
                execute_metamorphic_testing(
                    rel,
                    provider,
                    executor,
                    functions,
                    budget=args.budget,
                    seed=seed,
                    page_eq_threshold=config.page_eq_threshold,
                    workers=args.workers,
                )
            )
    finally:
        if transcript is not None and transcript is not sys.stderr:
            transcript.close()
    meta = {
        "seed": seed,
        "budget_seconds": args.budget,
        "page_eq_threshold": config.page_eq_threshold,
        "target": config.base_url,
        "pool_inputs": len(pool.inputs),
    }
    body_dir = None
    if args.report:
        report_path = Path(args.report)
        body_dir = report_path.with_name(report_path.name + ".bodies")
    report = campaign_report(results, meta, body_dir)
    if args.report:
        write_report(report, args.report)
    print(render_summary(report))
    return EXIT_FAILURES if report["summary"]["reported_failures"] else EXIT_OK


def cmd_report(args) -> int:
    try:
        report = json.loads(Path(args.campaign).read_text(encoding="utf-8"))
        print(render_summary(report))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.campaign}: not a campaign report ({exc})") from None
    return EXIT_OK


def cmd_fixture_serve(args) -> int:
    vulns = [v.strip().upper() for v in (args.vuln or "").split(",") if v.strip()]
    unknown = sorted(set(vulns) - set(VULNERABILITIES))
    if unknown:
        raise UsageError(f"unknown vulnerabilities {unknown}; choose from {', '.join(VULNERABILITIES)}")
    try:
        server = serve_fixture(vulns, args.port, args.secure_port, host=args.host)
    except OSError as exc:
        print(f"smrlmt: cannot start fixture: {exc}", file=sys.stderr)
        return EXIT_USAGE
    with server:
        if args.write_target:
            Path(args.write_target).write_text(server.target_toml())
        print(f"plain  {server.insecure_url}")
        print(f"secure {server.secure_url} (plain HTTP on a port labelled secure)")
        print(f"vulnerabilities: {', '.join(vulns) or 'none (patched)'}")
        sys.stdout.flush()
        stop = threading.Event()
        signal.signal(signal.SIGTERM, lambda *_: stop.set())
        try:
            stop.wait()
        except KeyboardInterrupt:
            pass
    return EXIT_OK


def cmd_catalog_list(args) -> int:
    catalog = load_catalog()
    files = {}
    for fname, source in catalog_files().items():
        for rel in parse(tokenize(source)):
            files[rel.name] = fname
    for name in sorted(catalog):
        print(f"{name}  {files[name]}")
    if args.all:
        for name in STUBS:
            print(f"{name}  (named only, no source)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smrlmt", description="Metamorphic security testing for Web systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and print the request transcript")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("check", help="parse and validate relation files")
    c.add_argument("files", nargs="+")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("crawl", help="crawl the target and write a data pool")
    c.add_argument("--target", required=True, help="target configuration (TOML)")
    c.add_argument("--out", required=True, help="new pool directory")
    c.add_argument("--budget", type=parse_duration, default=None, help="crawl time per user")
    c.add_argument("--script", action="append", help="manual test script to add (repeatable)")
    c.set_defaults(func=cmd_crawl)

    c = sub.add_parser("test", help="run relations over a data pool")
    c.add_argument("--pool", required=True)
    c.add_argument("--target", required=True, help="target configuration (TOML)")
    c.add_argument("--relations", nargs="*", default=[], help="catalog names or .smrl files (default: whole catalog)")
    c.add_argument("--budget", type=parse_duration, default=TEST_BUDGET, help=f"default 10m; {DEFAULT_BUDGET / 3600:g}h for long campaigns")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--report", help="write the campaign report (JSON) here")
    c.add_argument("--page-eq-threshold", type=float, default=None)
    c.add_argument("--workers", type=int, default=1, help="parallel runs; stateless targets only")
    c.add_argument("--transcript", help="write the request transcript (NDJSON) here")
    c.set_defaults(func=cmd_test)

    c = sub.add_parser("report", help="summarize a campaign report")
    c.add_argument("campaign")
    c.set_defaults(func=cmd_report)

    f = sub.add_parser("fixture", help="the vulnerable demo application")
    fsub = f.add_subparsers(dest="fixture_command", required=True, metavar="ACTION")
    c = fsub.add_parser("serve", help="serve the fixture until interrupted")
    c.add_argument("--vuln", default="", help="comma-separated subset of V1,V2,V3,V4")
    c.add_argument("--host", default="127.0.0.1")
    c.add_argument("--port", type=int, default=8080)
    c.add_argument("--secure-port", type=int, default=8443)
    c.add_argument("--write-target", help="also write a matching target configuration here")
    c.set_defaults(func=cmd_fixture_serve)

    k = sub.add_parser("catalog", help="shipped relations")
    ksub = k.add_subparsers(dest="catalog_command", required=True, metavar="ACTION")
    c = ksub.add_parser("list", help="list relation names")
    c.add_argument("--all", action="store_true", help="include catalog entries without sources")
    c.set_defaults(func=cmd_catalog_list)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError, PoolError, ScriptParseError, CrawlError, CheckFailed, ProviderError) as exc:
        print(f"smrlmt: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
