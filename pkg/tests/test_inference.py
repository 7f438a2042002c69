import pytest

from atomfix.benchmarks import parameterized_source, redundant_source
from atomfix.errors import EnumerationTooLarge, SequentialBug
from atomfix.inference import (
    NoWeakExtension,
    certify_minimality,
    fix_strong,
    fix_strong_baseline,
    fix_weak,
    phi_implies,
    removal_reintroduces_bug,
)
from atomfix.lang import Fix, instrument, parse
from atomfix.lang.syntax import Location
from atomfix.verifier import Bug, Constraint, Correct, Event, Trace

L = Location("t", 0, 1)


def switching_trace(*guards):
    """Thread 1 switches at each guard in turn, thread 2 runs in between."""
    events = []
    for g in guards:
        events.append(Event(1, L, "yield", g, g, True))
        events.append(Event(2, L, "yield", 100 + g, 100 + g, False))
    return Trace(tuple(events), failed=L)


class Scripted:
    """Verifier stub that returns the given traces in order, then Correct."""

    def __init__(self, traces):
        self.traces = list(traces)
        self.calls = []

    def __call__(self, program, phi, budget):
        self.calls.append(phi)
        if len(self.calls) <= len(self.traces):
            return Bug(self.traces[len(self.calls) - 1])
        return Correct()


class FakeProgram:
    guard_ids = list(range(10))
    weak = True


def test_baseline_conjoins_switch_sets():
    traces = [switching_trace(0, 1), switching_trace(1, 2), switching_trace(3)]
    run = fix_strong_baseline(FakeProgram(), verifier=Scripted(traces))
    assert run.phis[-1].clauses == (frozenset({0, 1}), frozenset({1, 2}), frozenset({3}))
    assert run.result.chosen == {1, 3}
    assert run.queries == 4


def test_optimized_proposes_hitting_sets():
    traces = [switching_trace(0, 1), switching_trace(1, 2), switching_trace(3)]
    stub = Scripted(traces)
    run = fix_strong(FakeProgram(), verifier=stub)
    assert stub.calls[1] == Constraint.disable({0})
    assert stub.calls[2] == Constraint.disable({1})
    assert run.result.chosen == {1, 3}


def test_optimized_constraint_is_stronger_at_every_step():
    traces = [switching_trace(*gs) for gs in [(0, 1), (2, 3), (1, 4), (0, 4), (5,)]]
    base = fix_strong_baseline(FakeProgram(), verifier=Scripted(traces))
    opt = fix_strong(FakeProgram(), verifier=Scripted(traces))
    for a, b in zip(opt.phis, base.phis):
        assert phi_implies(a, b)


def test_trace_without_switches_is_a_sequential_bug():
    with pytest.raises(SequentialBug):
        fix_strong(FakeProgram(), verifier=Scripted([Trace((), failed=L)]))


def test_weak_extension_uses_conflicts_with_strong_fix():
    t = Trace(
        (
            Event(1, L, "yield", 0, 0, True),
            Event(2, L, "yield", 4, 4, False),
            Event(2, L, "yield", 5, 5, False),
        ),
        failed=L,
    )
    stub = Scripted([t])
    run = fix_weak(FakeProgram(), {0}, verifier=stub)
    assert stub.calls[0] == Constraint.disable({0})
    assert stub.calls[1] == Constraint.disable({0, 4})
    assert run.result.chosen == {0, 4} and run.result.strong_core == {0}


def test_weak_trace_not_touching_strong_fix():
    t = Trace((Event(1, L, "yield", 3, 3, True), Event(2, L, "yield", 4, 4, False)), failed=L)
    with pytest.raises(NoWeakExtension):
        fix_weak(FakeProgram(), {0}, verifier=Scripted([t]))


def test_strong_fix_on_parameterized_program():
    p = instrument(parse(parameterized_source(2, 1, 0)))
    s1, s2 = fix_strong_baseline(p), fix_strong(p)
    assert len(s1.result.chosen) == len(s2.result.chosen) == 3
    assert certify_minimality(p, s2.result)


def test_real_sequential_bug():
    p = instrument(parse("int x;\nvoid main() {\n  x = 1;\n  assert(x == 2);\n}\n"))
    with pytest.raises(SequentialBug) as err:
        fix_strong(p)
    assert "main:4" in str(err.value)


def test_correct_program_needs_nothing():
    p = instrument(parse("int x;\nvoid main() {\n  x = 1;\n  assert(x == 1);\n}\n"))
    run = fix_strong(p)
    assert run.result.empty and run.queries == 1


def test_certificate_detects_non_minimal_fix():
    p = instrument(parse(redundant_source(4)))
    good = fix_strong(p).result
    assert certify_minimality(p, good)
    bloated = Fix("strong", set(p.guard_ids), set(p.guard_ids))
    cert = certify_minimality(p, bloated)
    assert cert.valid and cert.witnesses and not cert


def test_certificate_detects_invalid_fix():
    p = instrument(parse(redundant_source(3)))
    assert not certify_minimality(p, Fix("strong", set(), set()))


def test_certificate_falls_back_when_enumeration_is_too_large():
    p = instrument(parse(parameterized_source(4, 1, 0)))
    fix = fix_strong(p).result
    cert = certify_minimality(p, fix, max_calls=3)
    assert not cert.exhaustive and cert.ok
    with pytest.raises(EnumerationTooLarge):
        certify_minimality(p, fix, max_calls=3, strict=True)


def test_weak_fix_elements_are_removal_critical(banking):
    strong = fix_strong(banking).result
    weak = fix_weak(banking, strong.chosen).result
    for g in weak.chosen:
        assert removal_reintroduces_bug(banking, weak, g)
