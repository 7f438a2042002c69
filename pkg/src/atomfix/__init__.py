"""Automatic repair of concurrency bugs by inferring atomic regions."""

from .inference import certify_minimality, fix_strong, fix_strong_baseline, fix_weak
from .lang import Fix, instrument, parse, render_fix
from .pipeline import RunConfig, repair
from .verifier import Constraint, verify

__all__ = [
    "Constraint",
    "Fix",
    "RunConfig",
    "certify_minimality",
    "fix_strong",
    "fix_strong_baseline",
    "fix_weak",
    "instrument",
    "parse",
    "render_fix",
    "repair",
    "verify",
]
