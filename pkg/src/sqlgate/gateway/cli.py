"""Operator CLI: analyze, build-profile, check, serve, replay, bench.

Exit codes: 0 success/ALLOW, 1 failed replay, 2 BLOCK, 64 usage error,
66 unreadable input file.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

from sqlgate import corpus as corpus_mod
from sqlgate.enforcer import EnforceConfig, decide
from sqlgate.errors import SqlGateError
from sqlgate.gateway.config import load_config
from sqlgate.gateway.server import serve
from sqlgate.phpdal.analyzer import DEFAULT_SEEDS, DalSet, analyze_corpus, load_dal, save_dal
from sqlgate.profiler import (
    Profile,
    build_profile,
    load_profile,
    read_training_log,
    save_profile,
)
from sqlgate.sqlmodel.parser import OpCode

EX_USAGE = 64
EX_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sqlgate")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="resolve the database access layer of a PHP tree")
    p.add_argument("php_root")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seeds", default=",".join(DEFAULT_SEEDS),
                   help="comma-separated DB-API seed class names")

    p = sub.add_parser("build-profile", help="compile a training log into a profile")
    p.add_argument("-i", "--input", required=True, help="training log")
    p.add_argument("-d", "--dal", required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("check", help="one-shot decision for a tagged query")
    p.add_argument("-p", "--profile", required=True)
    p.add_argument("-d", "--dal", required=True)
    p.add_argument("--untagged", choices=("allow", "block"), default="block")
    p.add_argument("--parsefail", choices=("allow", "block"), default="block")
    p.add_argument("query", help="tagged query, or - to read stdin")

    p = sub.add_parser("serve", help="run the gate service")
    p.add_argument("-c", "--config", required=True)

    p = sub.add_parser("replay", help="replay a scenario corpus against a profile")
    p.add_argument("-p", "--profile", required=True)
    p.add_argument("-d", "--dal", required=True)
    p.add_argument("--corpus", required=True, help="directory of .scenario files")

    p = sub.add_parser("bench", help="measure single-threaded decide latency")
    p.add_argument("-p", "--profile", required=True)
    p.add_argument("-d", "--dal", default="")
    p.add_argument("-n", "--requests", type=int, default=10000)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EX_USAGE
    try:
        return _dispatch(args)
    except FileNotFoundError as exc:
        print(f"sqlgate: cannot open {exc.filename}", file=sys.stderr)
        return EX_NOINPUT
    except OSError as exc:
        print(f"sqlgate: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except SqlGateError as exc:
        print(f"sqlgate: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "analyze":
        seeds = tuple(s for s in args.seeds.split(",") if s)
        dal = analyze_corpus(args.php_root, seeds=seeds)
        save_dal(dal, args.output)
        print(f"{len(dal.subclasses)} subclasses, {len(dal.procedures)} procedures -> {args.output}")
        return 0

    if args.command == "build-profile":
        dal = load_dal(args.dal)
        records = read_training_log(args.input)
        profile = build_profile(records, dal)
        save_profile(profile, args.output)
        total = sum(len(v) for v in profile.entries.values())
        print(f"{len(profile.entries)} functions, {total} descriptors -> {args.output}")
        return 0

    if args.command == "check":
        query = sys.stdin.read().strip() if args.query == "-" else args.query
        profile = load_profile(args.profile)
        dal = load_dal(args.dal)
        config = EnforceConfig(untagged=args.untagged, parsefail=args.parsefail)
        verdict = decide(query, profile, dal, config)
        print(verdict.line())
        return 0 if verdict.allowed else 2

    if args.command == "serve":
        serve(load_config(args.config))
        return 0

    if args.command == "replay":
        profile = load_profile(args.profile)
        dal = load_dal(args.dal)
        scenarios = corpus_mod.load_corpus(args.corpus)
        report = corpus_mod.replay(scenarios, profile, dal)
        print(report.render())
        return 0 if report.ok else 1

    if args.command == "bench":
        profile = load_profile(args.profile)
        dal = load_dal(args.dal) if args.dal else DalSet(frozenset(), frozenset(), frozenset())
        queries = bench_queries(profile)
        if not queries:
            print("sqlgate: profile has no entries to generate bench queries from", file=sys.stderr)
            return 1
        latencies = run_bench(queries, profile, dal, args.requests)
        p50, p90, p99 = _percentiles(latencies, (50, 90, 99))
        print(f"requests: {len(latencies)}")
        print(f"median_ms: {p50 * 1000:.4f}")
        print(f"p90_ms: {p90 * 1000:.4f}")
        print(f"p99_ms: {p99 * 1000:.4f}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def bench_queries(profile: Profile) -> list[str]:
    """Synthesize one allowed query per profile entry."""
    queries = []
    for function in sorted(profile.entries):
        for descriptor in profile.entries[function]:
            if descriptor.op is not OpCode.SELECT or not descriptor.tables:
                continue
            table = sorted(descriptor.tables)[0]
            queries.append(f"SELECT * FROM {table} # {function}")
            break
    return queries


def run_bench(queries: list[str], profile: Profile, dal: DalSet, n: int) -> list[float]:
    latencies = []
    for i in range(n):
        query = queries[i % len(queries)]
        start = time.perf_counter()
        decide(query, profile, dal)
        latencies.append(time.perf_counter() - start)
    return latencies


def _percentiles(values: list[float], points: tuple[int, ...]) -> list[float]:
    quantiles = statistics.quantiles(values, n=100, method="inclusive")
    return [quantiles[p - 1] for p in points]


if __name__ == "__main__":
    raise SystemExit(main())
