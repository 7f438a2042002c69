from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Stats:
    queries: int = 0
    traces: int = 0
    elapsed_ms: float = 0.0

    def to_json(self) -> dict:
        return {"queries": self.queries, "traces": self.traces, "elapsed_ms": round(self.elapsed_ms, 3)}


@dataclass
class Fix:
    """A repair: which yields to put inside atomic blocks, and where those blocks go.

    For a weak fix ``strong_core`` is the strong fix it extends and is a
    subset of ``chosen``; for a strong fix the two are equal.
    """

    kind: str  # "strong" | "weak"
    chosen: frozenset
    strong_core: frozenset = frozenset()
    regions: list = field(default_factory=list)
    stats: Stats = field(default_factory=Stats)

    def __post_init__(self):
        self.chosen = frozenset(self.chosen)
        self.strong_core = frozenset(self.strong_core)
        if self.kind not in ("strong", "weak"):
            raise ValueError(f"unknown fix kind {self.kind!r}")
        if not self.strong_core <= self.chosen:
            raise ValueError("strong core must be part of the chosen set")

    @property
    def size(self) -> int:
        return len(self.chosen)

    @property
    def empty(self) -> bool:
        return not self.chosen
