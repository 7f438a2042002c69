"""Command-line front end.

Exit codes: 0 fix found (or program already correct), 1 bad input,
2 bug that atomic blocks cannot remove, 3 exploration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import corpus_dir
from .cfg import build_cfg
from .errors import AtomfixError, BudgetExceeded, ParseError, SequentialBug
from .inference import NoWeakExtension
from .lang.instrument import instrument
from .lang.parser import parse
from .lang.render import build_report, render_source
from .mhs import HittingInstance, solve_mhs
from .pipeline import RunConfig, bench_suite, format_table, repair
from .verifier.machine import ExplorationBudget, replay, verify
from .verifier.trace import dumps_trace, loads_trace

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNFIXABLE = 2
EXIT_BUDGET = 3


def _add_budget(p):
    p.add_argument("--step-cap", type=int, default=10**6, help="max executed instructions per verifier query")
    p.add_argument("--cs-bound", type=int, default=None, help="max context switches per schedule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atomfix", description="Repair concurrency bugs with minimal atomic blocks.")
    sub = parser.add_subparsers(dest="command", required=True)

    fix = sub.add_parser("fix", help="infer atomic blocks for a MiniConc program")
    fix.add_argument("source", type=Path)
    fix.add_argument("--mode", choices=["strong", "weak"], default="strong")
    fix.add_argument("--algorithm", choices=["baseline", "optimized"], default="optimized")
    fix.add_argument("--lexical", action="store_true", help="grow regions to lexically scoped blocks")
    _add_budget(fix)
    fix.add_argument("--dump-trace", type=Path, metavar="DIR", help="write every counterexample trace as JSON lines")
    fix.add_argument("--report", type=Path, help="write the JSON report here")
    fix.add_argument("--dump-cfg", type=Path, metavar="FILE", help="write the control-flow graph in Graphviz format")
    fix.add_argument("-o", "--output", type=Path, help="write the repaired source here instead of stdout")

    bench = sub.add_parser("bench", help="run the benchmark suite and compare against expected fixes")
    bench.add_argument("suite", nargs="?", type=Path, help="directory of .mc files (default: bundled corpus)")
    bench.add_argument("--no-certify", action="store_true", help="skip minimality certificates")
    bench.add_argument("--report", type=Path, help="write per-benchmark results as JSON")
    _add_budget(bench)

    ver = sub.add_parser("verify", help="check the instrumented program under all schedules")
    ver.add_argument("source", type=Path)
    ver.add_argument("--dump-trace", type=Path, metavar="FILE")
    _add_budget(ver)

    rep = sub.add_parser("replay", help="re-execute a dumped trace")
    rep.add_argument("source", type=Path)
    rep.add_argument("trace", type=Path)
    _add_budget(rep)

    show = sub.add_parser("instrument", help="print the program with inserted and guarded yields")
    show.add_argument("source", type=Path)

    mhs = sub.add_parser("mhs", help="minimum hitting set utilities")
    mhs_sub = mhs.add_subparsers(dest="mhs_command", required=True)
    solve = mhs_sub.add_parser("solve", help="solve an instance: one set per line, space-separated ids")
    solve.add_argument("instance", type=Path, help="instance file, or - for stdin")
    return parser


def _budget(args) -> ExplorationBudget:
    return ExplorationBudget(args.step_cap, args.cs_bound)


def _write_report(path, report):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path is None:
        return
    path.write_text(text)


def _dump_traces(directory: Path, runs):
    directory.mkdir(parents=True, exist_ok=True)
    n = 0
    for run in runs:
        for trace in run.traces:
            (directory / f"{run.algorithm}_{n:03d}.jsonl").write_text(dumps_trace(trace))
            n += 1


def cmd_fix(args) -> int:
    config = RunConfig(args.mode, args.algorithm, args.lexical, args.step_cap, args.cs_bound)
    algorithm = "weak" if args.mode == "weak" else args.algorithm
    try:
        program = parse(args.source.read_text())
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_report(args.report, build_report(None, None, args.mode, algorithm, "parse error", str(exc)))
        return EXIT_INPUT
    if args.dump_cfg:
        args.dump_cfg.write_text(build_cfg(instrument(program)).to_dot())
    try:
        outcome = repair(program, config)
    except (SequentialBug, NoWeakExtension) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = "sequential bug" if isinstance(exc, SequentialBug) else "no weak fix"
        _write_report(args.report, build_report(instrument(program), None, args.mode, algorithm, status, str(exc)))
        if args.dump_trace and exc.trace is not None:
            args.dump_trace.mkdir(parents=True, exist_ok=True)
            (args.dump_trace / "unfixable.jsonl").write_text(dumps_trace(exc.trace))
        return EXIT_UNFIXABLE
    except BudgetExceeded as exc:
        print(f"error: {exc}; program not verified beyond this bound", file=sys.stderr)
        _write_report(args.report, build_report(instrument(program), None, args.mode, algorithm, "budget exceeded", str(exc)))
        return EXIT_BUDGET
    except AtomfixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_report(args.report, build_report(None, None, args.mode, algorithm, "error", str(exc)))
        return EXIT_INPUT
    if args.dump_trace:
        _dump_traces(args.dump_trace, outcome.runs)
    if args.output:
        args.output.write_text(outcome.text)
    else:
        sys.stdout.write(outcome.text)
    _write_report(args.report, outcome.report)
    return EXIT_OK


def cmd_bench(args) -> int:
    suite = args.suite or corpus_dir()
    if not suite.is_dir():
        print(f"error: {suite} is not a directory", file=sys.stderr)
        return EXIT_INPUT
    config = RunConfig(step_cap=args.step_cap, cs_bound=args.cs_bound)
    rows = bench_suite(suite, config, certify=not args.no_certify)
    sys.stdout.write(format_table(rows))
    if args.report:
        args.report.write_text(json.dumps([r.to_json() for r in rows], indent=2, sort_keys=True) + "\n")
    bad = [r.name for r in rows if not r.ok]
    if bad:
        print(f"{len(bad)} benchmark(s) deviate from expectations: {', '.join(bad)}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_verify(args) -> int:
    program = instrument(parse(args.source.read_text()))
    try:
        result = verify(program, budget=_budget(args))
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if not result.is_bug:
        print(f"correct ({result.states} states, {result.steps} steps)")
        return EXIT_OK
    print(f"bug: assertion at {result.trace.failed} fails")
    text = dumps_trace(result.trace)
    if args.dump_trace:
        args.dump_trace.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_UNFIXABLE


def cmd_replay(args) -> int:
    program = instrument(parse(args.source.read_text()))
    trace = replay(program, loads_trace(args.trace.read_text()), budget=_budget(args))
    sys.stdout.write(dumps_trace(trace))
    if trace.failed:
        print(f"bug: assertion at {trace.failed} fails")
        return EXIT_UNFIXABLE
    print("schedule completes without failure")
    return EXIT_OK


def cmd_instrument(args) -> int:
    sys.stdout.write(render_source(instrument(parse(args.source.read_text())), instrumented=True))
    return EXIT_OK


def cmd_mhs(args) -> int:
    text = sys.stdin.read() if str(args.instance) == "-" else args.instance.read_text()
    sets = [[int(x) for x in line.split()] for line in text.splitlines() if line.strip() and not line.startswith("#")]
    print(" ".join(str(x) for x in sorted(solve_mhs(HittingInstance(sets)))))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "fix": cmd_fix,
        "bench": cmd_bench,
        "verify": cmd_verify,
        "replay": cmd_replay,
        "instrument": cmd_instrument,
        "mhs": cmd_mhs,
    }
    try:
        return handlers[args.command](args)
    except (OSError, AtomfixError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
