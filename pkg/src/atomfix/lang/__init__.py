"""MiniConc: syntax, parser, instrumentation passes and rendering."""

from .instrument import guard_yields, insert_yields, instrument, instrument_weak
from .parser import parse
from .fix import Fix, Stats
from .render import build_report, render_fix, render_source
from .syntax import Location, Program, YieldPoint

__all__ = [
    "Fix",
    "Location",
    "Program",
    "Stats",
    "YieldPoint",
    "build_report",
    "guard_yields",
    "insert_yields",
    "instrument",
    "instrument_weak",
    "parse",
    "render_fix",
    "render_source",
]
