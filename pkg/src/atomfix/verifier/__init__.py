"""Bounded interleaving explorer and trace analyses."""

from .constraint import Constraint
from .machine import ExplorationBudget, Machine, replay, verify
from .trace import Bug, Correct, Event, Trace, cs_of, dumps_trace, lifespan, loads_trace, wcs_of, wcs_restricted

__all__ = [
    "Bug",
    "Constraint",
    "Correct",
    "Event",
    "ExplorationBudget",
    "Machine",
    "Trace",
    "cs_of",
    "dumps_trace",
    "lifespan",
    "loads_trace",
    "replay",
    "verify",
    "wcs_of",
    "wcs_restricted",
]
