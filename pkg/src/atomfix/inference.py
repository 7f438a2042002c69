"""Repair loops: hitting sets of context-switch sets mined from bug traces.

``fix_strong_baseline`` blocks each trace's exact switch set and takes a
minimum hitting set at the end; ``fix_strong`` re-proposes a minimum hitting
set after every trace; ``fix_weak`` extends a strong fix with the yields that
conflict with it under a single global lock.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import AtomfixError, BudgetExceeded, EnumerationTooLarge, SequentialBug
from .lang.fix import Fix, Stats
from .lang.instrument import instrument_weak
from .mhs import HittingInstance, solve_mhs
from .verifier.constraint import Constraint
from .verifier.machine import ExplorationBudget, verify
from .verifier.trace import cs_of, wcs_of, wcs_restricted

Verifier = Callable  # (program, phi, budget) -> Correct | Bug


class NoWeakExtension(AtomfixError):
    """A weak-mode bug trace has conflicts, but none with the strong fix."""

    def __init__(self, trace):
        super().__init__(f"bug trace (assert at {trace.failed}) does not conflict with the strong fix")
        self.trace = trace


@dataclass
class RepairRun:
    algorithm: str  # "baseline" | "optimized" | "weak"
    traces: list = field(default_factory=list)
    collection: HittingInstance = field(default_factory=HittingInstance)
    queries: int = 0
    result: Optional[Fix] = None
    phis: list = field(default_factory=list)  # constraint after each trace
    elapsed_ms: float = 0.0

    def stats(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "queries": self.queries,
            "traces": len(self.traces),
            "fix_size": len(self.result.chosen) if self.result else None,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


def _loop(run, program, phi, budget, verifier, on_trace):
    verifier = verifier or verify
    start = time.perf_counter()
    try:
        while True:
            run.queries += 1
            res = verifier(program, phi, budget)
            if not res.is_bug:
                break
            run.traces.append(res.trace)
            phi = on_trace(res.trace)
            run.phis.append(phi)
    except BudgetExceeded as exc:
        exc.partial = run
        raise
    finally:
        run.elapsed_ms = (time.perf_counter() - start) * 1000
    return run


def _switch_set(trace):
    cs = cs_of(trace)
    if not cs:
        raise SequentialBug(trace)
    return cs


def fix_strong_baseline(program, budget: Optional[ExplorationBudget] = None, verifier: Optional[Verifier] = None) -> RepairRun:
    """Block each bug trace's switch set with one clause until the program is correct."""
    run = RepairRun("baseline", collection=HittingInstance(universe=program.guard_ids))

    def on_trace(t):
        cs = _switch_set(t)
        run.collection.add(cs)
        return (run.phis[-1] if run.phis else Constraint.true()).conjoin(cs)

    _loop(run, program, Constraint.true(), budget, verifier, on_trace)
    chosen = solve_mhs(run.collection)
    run.result = Fix("strong", chosen, chosen, stats=Stats(run.queries, len(run.traces), run.elapsed_ms))
    return run


def fix_strong(program, budget: Optional[ExplorationBudget] = None, verifier: Optional[Verifier] = None) -> RepairRun:
    """Re-propose a minimum hitting set of all switch sets after every trace."""
    run = RepairRun("optimized", collection=HittingInstance(universe=program.guard_ids))

    def on_trace(t):
        run.collection.add(_switch_set(t))
        return Constraint.disable(solve_mhs(run.collection))

    _loop(run, program, Constraint.true(), budget, verifier, on_trace)
    chosen = solve_mhs(run.collection)
    run.result = Fix("strong", chosen, chosen, stats=Stats(run.queries, len(run.traces), run.elapsed_ms))
    return run


def fix_weak(program, strong, budget: Optional[ExplorationBudget] = None, verifier: Optional[Verifier] = None) -> RepairRun:
    """Extend the strong fix ``strong`` to one that holds under weak atomicity.

    ``program`` may be guard-instrumented or already weak-instrumented.
    """
    if not program.weak:
        program = instrument_weak(program)
    strong = frozenset(strong)
    run = RepairRun("weak", collection=HittingInstance(universe=program.guard_ids))

    def on_trace(t):
        pairs = wcs_of(t)
        if not pairs:
            raise SequentialBug(t, "bug trace has no conflicting yields (sequential bug)")
        extra = wcs_restricted(pairs, strong)
        if not extra:
            raise NoWeakExtension(t)
        run.collection.add(extra)
        return Constraint.disable(strong | solve_mhs(run.collection))

    _loop(run, program, Constraint.disable(strong), budget, verifier, on_trace)
    chosen = strong | solve_mhs(run.collection)
    run.result = Fix("weak", chosen, strong, stats=Stats(run.queries, len(run.traces), run.elapsed_ms))
    return run


# --------------------------------------------------------------------------
# Minimality certificates
# --------------------------------------------------------------------------


@dataclass
class Certificate:
    """Outcome of a minimality check.

    ``valid``: the fix itself removes every bug.  ``witnesses`` lists the
    smaller (strong) or reduced (weak) guard sets that turned out to fix the
    program too; the fix is minimal when there are none.
    """

    kind: str
    valid: bool = False
    exhaustive: bool = True
    checked: int = 0
    calls: int = 0
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.valid and not self.witnesses

    def __bool__(self) -> bool:
        return self.ok


def _fixes(program, guards, budget, verifier) -> bool:
    return not (verifier or verify)(program, Constraint.disable(guards), budget).is_bug


def certify_minimality(
    program,
    fix: Fix,
    budget: Optional[ExplorationBudget] = None,
    max_calls: int = 10**5,
    strict: bool = False,
    verifier: Optional[Verifier] = None,
) -> Certificate:
    """Check by brute force that no smaller fix exists (strong) or that every
    chosen yield is needed (weak).

    For a strong fix of size k it suffices to test the subsets of size k-1:
    any smaller fixing set would extend to a fixing set of size k-1, because
    disabling more guards never re-introduces a bug.
    """
    cert = Certificate(fix.kind)
    if fix.kind == "weak" and not program.weak:
        program = instrument_weak(program)
    cert.valid = _fixes(program, fix.chosen, budget, verifier)
    cert.calls += 1
    chosen = sorted(fix.chosen)
    if not chosen:
        return cert

    if fix.kind == "strong":
        guards = program.guard_ids
        k = len(chosen) - 1
        if math.comb(len(guards), k) <= max_calls:
            candidates = itertools.combinations(guards, k)
        else:
            cert.exhaustive = False
            if strict:
                raise EnumerationTooLarge(cert)
            candidates = (tuple(g for g in chosen if g != q) for q in chosen)
    else:
        candidates = (tuple(g for g in chosen if g != q) for q in chosen)

    for subset in candidates:
        cert.checked += 1
        cert.calls += 1
        if _fixes(program, subset, budget, verifier):
            cert.witnesses.append(frozenset(subset))
    return cert


def removal_reintroduces_bug(program, fix: Fix, guard: int, budget=None, verifier=None) -> bool:
    """Whether dropping ``guard`` from the fix lets a bug through again (one query)."""
    if fix.kind == "weak" and not program.weak:
        program = instrument_weak(program)
    return not _fixes(program, fix.chosen - {guard}, budget, verifier)


def phi_implies(a: Constraint, b: Constraint) -> bool:
    """Entailment between two constraints of the repair loops."""
    return a.implies(b)
