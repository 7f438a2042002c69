"""End-to-end repair: parse, instrument, infer, reconstruct regions, render."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cfg import build_cfg, fix_regions
from .inference import certify_minimality, fix_strong, fix_strong_baseline, fix_weak
from .lang.instrument import instrument, instrument_weak
from .lang.parser import parse
from .lang.render import build_report, render_fix
from .verifier.machine import ExplorationBudget


@dataclass
class RunConfig:
    mode: str = "strong"  # "strong" | "weak"
    algorithm: str = "optimized"  # "baseline" | "optimized"; weak mode always uses "optimized" first
    lexical: bool = False
    step_cap: int = 10**6
    cs_bound: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("strong", "weak"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.algorithm not in ("baseline", "optimized"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    @property
    def budget(self) -> ExplorationBudget:
        return ExplorationBudget(self.step_cap, self.cs_bound)


@dataclass
class Outcome:
    program: object  # guard-instrumented program
    fix: object
    runs: list = field(default_factory=list)
    text: str = ""
    report: dict = field(default_factory=dict)


def repair(source, config: Optional[RunConfig] = None) -> Outcome:
    """Run the configured pipeline on MiniConc text or a parsed program."""
    config = config or RunConfig()
    program = parse(source) if isinstance(source, str) else source
    guarded = instrument(program)
    budget = config.budget
    runs = []
    if config.mode == "weak" or config.algorithm == "optimized":
        runs.append(fix_strong(guarded, budget))
    else:
        runs.append(fix_strong_baseline(guarded, budget))
    fix = runs[-1].result
    if config.mode == "weak":
        runs.append(fix_weak(instrument_weak(guarded), fix.chosen, budget))
        fix = runs[-1].result
        fix.stats.queries = sum(r.queries for r in runs)
        fix.stats.traces = sum(len(r.traces) for r in runs)
        fix.stats.elapsed_ms = sum(r.elapsed_ms for r in runs)
    fix.regions = fix_regions(guarded, build_cfg(guarded), fix.chosen, config.lexical)
    algorithm = "weak" if config.mode == "weak" else config.algorithm
    report = build_report(guarded, fix, config.mode, algorithm)
    return Outcome(guarded, fix, runs, render_fix(guarded, fix), report)


# --------------------------------------------------------------------------
# Benchmark suite
# --------------------------------------------------------------------------


@dataclass
class BenchRow:
    name: str
    guards: int = 0
    sizes: dict = field(default_factory=dict)  # "S" / "W" -> int
    queries: dict = field(default_factory=dict)  # "S1" / "S2" / "W" -> int
    times: dict = field(default_factory=dict)  # same keys, milliseconds
    regions: dict = field(default_factory=dict)  # "S" / "W" -> list of sorted location lists
    certified: dict = field(default_factory=dict)  # "S" / "W" -> bool
    problems: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and not self.problems

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "guards": self.guards,
            "sizes": self.sizes,
            "queries": self.queries,
            "elapsed_ms": {k: round(v, 3) for k, v in self.times.items()},
            "regions": self.regions,
            "certified": self.certified,
            "problems": self.problems,
            "error": self.error,
        }


def _region_sets(regions):
    return sorted(sorted(str(n) for n in r.sorted()) for r in regions)


def bench_program(path: Path, config: Optional[RunConfig] = None, certify: bool = True) -> BenchRow:
    """Run the baseline, optimized and weak pipelines on one program and check its sidecar."""
    config = config or RunConfig()
    row = BenchRow(path.stem)
    try:
        guarded = instrument(parse(path.read_text()))
        cfg = build_cfg(guarded)
        budget = config.budget
        row.guards = len(guarded.guard_ids)
        s1 = fix_strong_baseline(guarded, budget)
        s2 = fix_strong(guarded, budget)
        w = fix_weak(instrument_weak(guarded), s2.result.chosen, budget)
        for key, run in (("S1", s1), ("S2", s2), ("W", w)):
            row.queries[key] = run.queries
            row.times[key] = run.elapsed_ms
        row.sizes = {"S": len(s2.result.chosen), "W": len(w.result.chosen)}
        if len(s1.result.chosen) != len(s2.result.chosen):
            row.problems.append(f"baseline fix size {len(s1.result.chosen)} != optimized {len(s2.result.chosen)}")
        row.regions = {
            "S": _region_sets(fix_regions(guarded, cfg, s2.result.chosen)),
            "W": _region_sets(fix_regions(guarded, cfg, w.result.chosen)),
        }
        if certify:
            start = time.perf_counter()
            row.certified["S"] = bool(certify_minimality(guarded, s2.result, budget))
            row.certified["W"] = bool(certify_minimality(instrument_weak(guarded), w.result, budget))
            row.times["cert"] = (time.perf_counter() - start) * 1000
            for key, ok in row.certified.items():
                if not ok:
                    row.problems.append(f"{key} fix failed its minimality certificate")
        row.problems.extend(_check_sidecar(path, row))
    except Exception as exc:  # one broken benchmark must not stop the suite
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _check_sidecar(path: Path, row: BenchRow) -> list:
    sidecar = path.with_suffix(".expected.json")
    if not sidecar.exists():
        return ["no expected-fix sidecar"]
    expected = json.loads(sidecar.read_text())
    problems = []
    for key in ("S", "W"):
        want = expected.get({"S": "strong", "W": "weak"}[key])
        if want is None:
            continue
        if "size" in want and want["size"] != row.sizes.get(key):
            problems.append(f"{key} fix size {row.sizes.get(key)} != expected {want['size']}")
        if "regions" in want and sorted(sorted(r) for r in want["regions"]) != row.regions.get(key):
            problems.append(f"{key} regions {row.regions.get(key)} != expected {want['regions']}")
    return problems


def bench_suite(suite: Path, config: Optional[RunConfig] = None, certify: bool = True) -> list:
    return [bench_program(p, config, certify) for p in sorted(Path(suite).glob("*.mc"))]


def format_table(rows) -> str:
    header = ["Example", "#CS", "S", "W", "Q:S1", "Q:S2", "Q:W", "ms:S1", "ms:S2", "ms:W", "Status"]
    body = []
    for r in rows:
        if r.error:
            body.append([r.name, str(r.guards)] + ["-"] * 8 + [f"ERROR {r.error}"])
            continue
        status = "ok" if r.ok else "; ".join(r.problems)
        body.append(
            [r.name, str(r.guards), str(r.sizes.get("S", "-")), str(r.sizes.get("W", "-"))]
            + [str(r.queries.get(k, "-")) for k in ("S1", "S2", "W")]
            + [f"{r.times[k]:.1f}" if k in r.times else "-" for k in ("S1", "S2", "W")]
            + [status]
        )
    widths = [max(len(x) for x in col) for col in zip(header, *body)] if body else [len(h) for h in header]
    lines = [" | ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    for b in body:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(b, widths)))
    return "\n".join(lines) + "\n"
