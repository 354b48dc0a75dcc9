"""Command-line entry point.

Exit codes: 0 success (or satisfied/inconclusive run), 2 spec error, 3 violated
run, 64 usage error, 74 I/O error.  Human-readable output goes to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench import TABLE_CONFIGS, emit_report, parse_config, run_benchmark
from .casestudies import BUGS, SCENARIOS, ScenarioConfig
from .casestudies.common import ScenarioError
from .lang import ParseError, WellFormednessError, load_spec, print_formula
from .runtime import RuntimeFailure
from .semantics import FIRST_MATCH, MODES, oracle_verdict, satisfies
from .trace import ROOT, read_trace
from .verdict import VerdictKind

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_VIOLATED = 3
EXIT_USAGE = 64
EXIT_IO = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="waltz", description="Context-aware runtime verification toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="parse and well-formedness-check a .waltz file")
    c.add_argument("spec", type=Path)

    r = sub.add_parser("run", help="run a case study under a monitor")
    r.add_argument("scenario", choices=sorted(SCENARIOS))
    r.add_argument("--clients", type=int, default=1)
    r.add_argument("--requests", type=int, default=10)
    r.add_argument("--spec", type=Path, help="property file (default: the shipped one)")
    r.add_argument("--bug", help="bug to inject; one of: " + ", ".join(sorted(BUGS.values())))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trace-out", type=Path)
    r.add_argument("--verdict-log", type=Path)
    r.add_argument("--report", type=Path, help="write the JSON run report here")

    o = sub.add_parser("oracle", help="evaluate a spec on a recorded trace")
    o.add_argument("trace", type=Path)
    o.add_argument("spec", type=Path)
    o.add_argument("--mode", choices=MODES, default=FIRST_MATCH)

    b = sub.add_parser("bench", help="baseline vs instrumented benchmark")
    b.add_argument("scenario", choices=sorted(SCENARIOS))
    b.add_argument("--config", action="append", default=[],
                   help="e.g. 5Cx30M; repeatable (default: the standard table for the scenario)")
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--warmup", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--background-work", type=int, default=0)
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    b.add_argument("--details", action="store_true", help="also write per-rep JSON next to the report")
    return p


def cmd_check(args) -> int:
    try:
        f = load_spec(args.spec)
    except (ParseError, WellFormednessError) as exc:
        _say(f"{args.spec}: {exc}")
        return EXIT_SPEC
    _say(f"{args.spec}: ok")
    _say(print_formula(f))
    return EXIT_OK


def cmd_run(args) -> int:
    if args.clients < 1 or args.requests < 1:
        raise UsageError("--clients and --requests must be >= 1")
    if args.bug is not None and args.bug != BUGS[args.scenario]:
        raise UsageError(f"scenario {args.scenario} knows only bug {BUGS[args.scenario]!r}")
    spec = None
    if args.spec is not None:
        try:
            spec = load_spec(args.spec)
        except (ParseError, WellFormednessError) as exc:
            _say(f"{args.spec}: {exc}")
            return EXIT_SPEC
    cfg = ScenarioConfig(args.clients, args.requests, args.bug, args.seed)
    trace_out = args.trace_out or Path(f"{args.scenario}-trace.jsonl")
    verdict_log = args.verdict_log or Path(f"{args.scenario}-verdicts.jsonl")
    try:
        report = SCENARIOS[args.scenario](cfg, spec=spec, trace_out=trace_out, verdict_log=verdict_log)
    except (ScenarioError, RuntimeFailure) as exc:
        _say(f"run failed: {exc}")
        return 1
    if args.report is not None:
        report.write_json(args.report)
    v = report.verdict
    _say(f"{args.scenario} {cfg.label}: {v.kind.value}"
         + (f" (context {v.context}, step {v.step})" if v.kind is VerdictKind.VIOLATED else ""))
    _say(f"trace: {report.trace_path}  verdict log: {report.verdict_log_path}")
    return EXIT_VIOLATED if v.kind is VerdictKind.VIOLATED else EXIT_OK


def cmd_oracle(args) -> int:
    try:
        f = load_spec(args.spec)
    except (ParseError, WellFormednessError) as exc:
        _say(f"{args.spec}: {exc}")
        return EXIT_SPEC
    events, tree = read_trace(args.trace)
    result = satisfies(events, tree, ROOT, 1, len(events) + 1, f, args.mode)
    print("true" if result else "false")
    if args.mode == FIRST_MATCH:
        _say(f"three-valued reading: {oracle_verdict(events, tree, f).value}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.reps < 1 or args.warmup < 0:
        raise UsageError("--reps must be >= 1 and --warmup >= 0")
    try:
        configs = [parse_config(c) for c in args.config] or TABLE_CONFIGS[args.scenario]
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = []
    for clients, requests in configs:
        cfg = ScenarioConfig(clients, requests, seed=args.seed, background_work=args.background_work)
        row = run_benchmark(args.scenario, cfg, reps=args.reps, warmup=args.warmup)
        _say(f"{args.scenario} {cfg.label}: base {row.base.exec_time_ms:.1f} ms, "
             f"instr {row.instr.exec_time_ms:.1f} ms, OH {row.overhead_pct:.1f}%")
        rows.append(row)
    emit_report(rows, args.out, args.format, details=args.details)
    _say(f"report written to {args.out}")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "run": cmd_run, "oracle": cmd_oracle, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _say(f"usage error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _say(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
