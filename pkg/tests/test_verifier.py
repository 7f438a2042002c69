import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomfix.benchmarks import parameterized_source
from atomfix.errors import BudgetExceeded
from atomfix.lang import instrument, instrument_weak, parse
from atomfix.lang.syntax import Location
from atomfix.verifier import (
    Constraint,
    Event,
    ExplorationBudget,
    Trace,
    cs_of,
    dumps_trace,
    lifespan,
    loads_trace,
    replay,
    verify,
    wcs_of,
    wcs_restricted,
)
from oracle_interp import has_bug, random_source

L = Location("t", 0, 1)
M = [Location("t", i, 10 + i) for i in range(6)]


def small_programs(rng, count):
    out = []
    while len(out) < count:
        p = instrument(parse(random_source(rng)))
        if len(p.yields) <= 8:
            out.append(p)
    return out


# -- constraints ------------------------------------------------------------


def test_constraint_basics():
    phi = Constraint.true().conjoin({1, 2}).conjoin({3})
    assert phi.disabled == {3}
    assert phi.residual() == (frozenset({1, 2}),)
    assert phi.satisfied_by({1}) and not phi.satisfied_by({1, 2}) and not phi.satisfied_by({3})
    assert str(Constraint.true()) == "true"
    with pytest.raises(ValueError):
        phi.conjoin(set())


@given(st.lists(st.frozensets(st.integers(0, 5), min_size=1, max_size=3), max_size=4), st.frozensets(st.integers(0, 5)))
def test_implies_matches_semantics(clauses, extra):
    """``a.implies(b)`` agrees with checking every assignment over the guards."""
    a = Constraint(tuple(clauses)).conjoin(extra) if extra else Constraint(tuple(clauses))
    b = Constraint(tuple(clauses[:2]))
    universe = range(6)
    semantic = all(
        b.satisfied_by(on) or not a.satisfied_by(on)
        for mask in range(1 << 6)
        for on in [{g for g in universe if mask >> g & 1}]
    )
    assert a.implies(b) == semantic


# -- traces -----------------------------------------------------------------


def make_trace():
    return Trace(
        (
            Event(1, M[0], "yield", 0, 0, True),  # thread 1 switches at guard 0
            Event(2, M[1], "stmt"),
            Event(2, M[2], "yield", 1, 1, False),  # thread 2 passes guard 1
            Event(2, M[3], "yield", 2, 2, True),  # ... and switches at guard 2
            Event(1, M[4], "resume", 0, 0),
            Event(1, M[5], "stmt"),
        )
    )


def test_cs_and_wcs_of_handmade_trace():
    t = make_trace()
    assert cs_of(t) == {0, 2}
    assert lifespan(t, 0) == {M[1], M[2], M[3]}
    assert wcs_of(t) == {(0, 1), (0, 2), (2, 0)}
    assert wcs_restricted(t, frozenset({0})) == {1, 2}
    assert wcs_restricted(wcs_of(t), frozenset({2})) == {0}


def test_trace_dump_round_trip(banking):
    bug = verify(banking)
    text = dumps_trace(bug.trace)
    again = loads_trace(text)
    assert again.events == bug.trace.events
    assert dumps_trace(replay(banking, again)) == text


# -- exploration ------------------------------------------------------------


def test_verdicts_match_naive_oracle(rng):
    for p in small_programs(rng, 25):
        assert verify(p).is_bug == has_bug(p)


def test_verify_is_deterministic(banking):
    a, b = verify(banking), verify(banking)
    assert a.trace == b.trace and a.states == b.states


def test_replay_reproduces_failure(banking):
    bug = verify(banking)
    again = replay(banking, bug.trace)
    assert again.failed == bug.trace.failed
    assert again.events == bug.trace.events


def test_bug_trace_is_admitted_by_phi(banking):
    phi = Constraint.disable({0, 1})
    bug = verify(banking, phi)
    assert bug.is_bug
    assert not (cs_of(bug.trace) & {0, 1})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_disabling_more_guards_keeps_programs_correct(seed, data):
    p = instrument(parse(random_source(random.Random(seed))))
    if len(p.yields) > 8:
        return
    guards = p.guard_ids
    small = data.draw(st.frozensets(st.sampled_from(guards))) if guards else frozenset()
    big = small | (data.draw(st.frozensets(st.sampled_from(guards))) if guards else frozenset())
    if not verify(p, Constraint.disable(small)).is_bug:
        assert not verify(p, Constraint.disable(big)).is_bug


def test_disabling_everything_leaves_only_sequential_bugs():
    p = instrument(parse(parameterized_source(2, 1, 0)))
    assert verify(p).is_bug
    assert not verify(p, Constraint.disable(p.guard_ids)).is_bug


def test_step_cap_raises_budget_exceeded(banking):
    with pytest.raises(BudgetExceeded):
        verify(banking, budget=ExplorationBudget(step_cap=50))


def test_context_switch_bound_limits_search():
    p = instrument(parse(parameterized_source(0, 1, 0)))
    assert not verify(p, budget=ExplorationBudget(cs_bound=0)).is_bug
    assert verify(p, budget=ExplorationBudget(cs_bound=2)).is_bug


def test_weak_mode_rejects_non_unit_clauses(banking):
    with pytest.raises(ValueError):
        verify(instrument_weak(banking), Constraint.true().conjoin({0, 1}))


def test_weak_mode_disabling_everything_is_correct(banking):
    assert not verify(instrument_weak(banking), Constraint.disable(banking.guard_ids)).is_bug
