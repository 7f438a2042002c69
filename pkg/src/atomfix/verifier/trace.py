"""Bug traces and the analyses the repair loops run on them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from ..lang.syntax import Location


class Event(NamedTuple):
    """One executed step.

    ``kind`` is ``"stmt"``, ``"yield"`` (passing a yield, switching or not) or
    ``"resume"`` (a thread regaining control after switching at ``yid``).
    ``guard`` is the guard id of the yield, ``None`` for excluded yields.
    """

    thread: int
    loc: Location
    kind: str = "stmt"
    yid: Optional[int] = None
    guard: Optional[int] = None
    switched: bool = False

    @property
    def took_switch_at(self) -> Optional[int]:
        return self.guard if self.switched else None


@dataclass(frozen=True)
class Trace:
    events: tuple
    failed: Optional[Location] = None
    decisions: tuple = ()
    threads: tuple = ()  # procedure name of each thread id

    def __len__(self):
        return len(self.events)

    def switch_indices(self) -> list:
        return [i for i, e in enumerate(self.events) if e.switched]


@dataclass(frozen=True)
class Correct:
    states: int = 0
    steps: int = 0

    is_bug = False


@dataclass(frozen=True)
class Bug:
    trace: Trace
    states: int = 0
    steps: int = 0

    is_bug = True


def cs_of(trace: Trace) -> frozenset:
    """Guards at which the trace took a context switch."""
    return frozenset(e.guard for e in trace.events if e.switched and e.guard is not None)


def lifespan(trace: Trace, switch_event: int) -> set:
    """Locations executed after a switch and before the switching thread runs again."""
    events = trace.events
    owner = events[switch_event].thread
    out = set()
    for e in events[switch_event + 1:]:
        if e.thread == owner:
            break
        out.add(e.loc)
    return out


def _lifespan_events(events, i):
    owner = events[i].thread
    for e in events[i + 1:]:
        if e.thread == owner:
            return
        yield e


def wcs_of(trace: Trace) -> frozenset:
    """Conflict pairs ``(g1, g2)``: the trace switches at g1 and passes g2 in that lifespan.

    Passing a yield means executing it or resuming from it.
    """
    events = trace.events
    pairs = set()
    for i, e in enumerate(events):
        if not (e.switched and e.guard is not None):
            continue
        for f in _lifespan_events(events, i):
            if f.kind in ("yield", "resume") and f.guard is not None:
                pairs.add((e.guard, f.guard))
    return frozenset(pairs)


def wcs_restricted(trace_or_pairs, strong: frozenset) -> frozenset:
    """Second components of conflict pairs whose first component is in ``strong``."""
    pairs = wcs_of(trace_or_pairs) if isinstance(trace_or_pairs, Trace) else trace_or_pairs
    return frozenset(b for a, b in pairs if a in strong)


# --------------------------------------------------------------------------
# JSON-lines dump / load
# --------------------------------------------------------------------------


def event_to_dict(e: Event, threads=()) -> dict:
    d = {
        "thread": e.thread,
        "proc": e.loc.proc,
        "index": e.loc.index,
        "line": e.loc.line,
        "kind": e.kind,
        "yield": e.yid,
        "guard": e.guard,
        "switch": e.switched,
    }
    if threads:
        d["thread_proc"] = threads[e.thread]
    return d


def dumps_trace(trace: Trace) -> str:
    lines = [json.dumps(event_to_dict(e, trace.threads), sort_keys=True) for e in trace.events]
    return "\n".join(lines) + ("\n" if lines else "")


def loads_trace(text: str) -> Trace:
    events = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        d = json.loads(raw)
        events.append(
            Event(
                d["thread"],
                Location(d["proc"], d["index"], d["line"]),
                d.get("kind", "stmt"),
                d.get("yield"),
                d.get("guard"),
                bool(d.get("switch", False)),
            )
        )
    return Trace(tuple(events))
