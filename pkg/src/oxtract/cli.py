"""Command-line entry point: check, run, enrich, report.

stdout carries data (records, the join report, the matrix); stderr carries
diagnostics and machine-readable run stats.  Exit codes are stable:

    0  success
    1  usage, syntax, or validation error
    2  fetch failure (network error, dead URL, replay-cache miss)
    3  iteration or page limit exceeded
    4  duplicate harvest join key
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import engine, enrich, extraction
from .errors import (
    DuplicateHarvestKey,
    FetchError,
    IterationCapExceeded,
    OxtractError,
    PageLimitExceeded,
    RunAborted,
    SourceError,
)
from .fetcher import Fetcher, FetchPolicy
from .oxlang import format_wrapper, parse

_SERIALIZERS = {
    "xml": extraction.serialize_xml,
    "csv": extraction.serialize_csv,
    "json": extraction.serialize_json,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SourceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except RunAborted as err:
        print(f"error: {err.cause}", file=sys.stderr)
        print(json.dumps(err.stats.as_dict()), file=sys.stderr)
        return _abort_code(err.cause)
    except DuplicateHarvestKey as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except (OxtractError, TypeError) as err:
        # TypeError: runtime function-argument misuse inside an expression
        print(f"error: {err}", file=sys.stderr)
        return 1


def _abort_code(cause: Exception) -> int:
    if isinstance(cause, FetchError):
        return 2
    if isinstance(cause, (IterationCapExceeded, PageLimitExceeded)):
        return 3
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oxtract",
        description="Run extraction wrappers and enrich test collections.")
    sub = parser.add_subparsers(required=True)

    check = sub.add_parser("check", help="parse a wrapper and print its canonical form")
    check.add_argument("wrapper", type=Path)
    check.set_defaults(func=cmd_check)

    run = sub.add_parser("run", help="execute wrapper(s) and serialize the records")
    run.add_argument("wrappers", nargs="+", type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help="output file (single wrapper) or directory (several)")
    run.add_argument("--format", choices=sorted(_SERIALIZERS), default="xml")
    run.add_argument("--cache-mode", choices=["off", "read-write", "replay-only"],
                     default="off")
    run.add_argument("--cache-dir", default=None)
    run.add_argument("--max-iterations", type=int, default=10_000)
    run.add_argument("--max-pages", type=int, default=None)
    run.add_argument("--delay-ms", type=int, default=1000)
    run.add_argument("--jobs", type=int, default=1,
                     help="concurrent wrapper runs (whole runs only)")
    run.set_defaults(func=cmd_run)

    enr = sub.add_parser("enrich", help="join harvested records into a collection")
    enr.add_argument("collection", type=Path)
    enr.add_argument("harvest_xml", type=Path)
    enr.add_argument("--out", type=Path, required=True)
    enr.add_argument("--key-field", default="acq_id")
    enr.add_argument("--id-prefix", default="GIRT")
    enr.add_argument("--field-map", type=Path, required=True,
                     help="JSON file mapping harvest names to collection fields")
    enr.set_defaults(func=cmd_enrich)

    rep = sub.add_parser("report", help="print the field-availability matrix")
    rep.add_argument("corpora", nargs="+",
                     help="collection files, optionally as NAME=PATH")
    rep.add_argument("--rules", type=Path, default=None)
    rep.set_defaults(func=cmd_report)
    return parser


def cmd_check(args) -> int:
    source = args.wrapper.read_text(encoding="utf-8")
    ast = parse(source)
    print(format_wrapper(ast))
    return 0


def cmd_run(args) -> int:
    if len(args.wrappers) > 1 and args.out is None:
        print("error: several wrappers need --out DIRECTORY", file=sys.stderr)
        return 1
    policy = FetchPolicy(delay_s=args.delay_ms / 1000.0,
                         cache_mode=args.cache_mode, cache_dir=args.cache_dir)
    fetcher = Fetcher(policy)
    limits = engine.Limits(max_iterations=args.max_iterations,
                           max_pages=args.max_pages)
    wrappers = [(path, parse(path.read_text(encoding="utf-8")))
                for path in args.wrappers]

    def one(path: Path, ast) -> int:
        tree, stats = engine.collect_records(ast, fetcher, limits)
        payload = _SERIALIZERS[args.format](tree)
        if args.out is None:
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
        else:
            target = args.out
            if len(args.wrappers) > 1 or target.is_dir():
                target.mkdir(parents=True, exist_ok=True)
                target = target / f"{path.stem}.{args.format}"
            target.write_bytes(payload)
        print(json.dumps({"wrapper": str(path), **stats.as_dict()}), file=sys.stderr)
        return 0

    if args.jobs > 1 and len(wrappers) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(one, path, ast) for path, ast in wrappers]
            codes = []
            for future in futures:
                try:
                    codes.append(future.result())
                except RunAborted as err:
                    print(f"error: {err.cause}", file=sys.stderr)
                    codes.append(_abort_code(err.cause))
            return max(codes)
    for path, ast in wrappers:
        code = one(path, ast)
        if code:
            return code
    return 0


def cmd_enrich(args) -> int:
    field_map = json.loads(args.field_map.read_text(encoding="utf-8"))
    if not isinstance(field_map, dict):
        print("error: field map must be a JSON object", file=sys.stderr)
        return 1
    docs = enrich.read_collection(args.collection)
    harvest = extraction.parse_records_xml(args.harvest_xml.read_bytes())
    enriched, report = enrich.join(docs, harvest, args.key_field, field_map,
                                   prefix=args.id_prefix)
    enrich.write_collection(enriched, args.out)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def cmd_report(args) -> int:
    rules = enrich.load_rules(args.rules)
    known = set(enrich.DEFAULT_VOCABULARY)
    for name in sorted(set(rules) - known):
        print(f"warning: ignoring rule for unknown field {name!r}", file=sys.stderr)
    corpora = []
    for spec in args.corpora:
        name, _, path = spec.rpartition("=")
        path = Path(path)
        corpora.append((name or path.stem, enrich.read_collection(path)))
    matrix = enrich.field_matrix(corpora, rules)
    sys.stdout.write(enrich.render_matrix(matrix))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
