"""Exact minimum hitting sets with a lexicographic tie-break."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import EmptySetMember, UniverseTooLarge


@dataclass
class HittingInstance:
    """A collection of sets over a universe of guard ids.

    The universe defaults to the union of the sets.
    """

    sets: list = field(default_factory=list)
    universe: Optional[frozenset] = None

    def __post_init__(self):
        self.sets = [frozenset(s) for s in self.sets]
        union = frozenset().union(*self.sets) if self.sets else frozenset()
        self.universe = union if self.universe is None else frozenset(self.universe) | union

    def add(self, s: Iterable[int]) -> None:
        s = frozenset(s)
        self.sets.append(s)
        self.universe = self.universe | s

    def __len__(self):
        return len(self.sets)

    def to_json(self) -> list:
        return [sorted(s) for s in self.sets]


def is_hitting_set(inst: HittingInstance, h: Iterable[int]) -> bool:
    h = set(h)
    return all(s & h for s in inst.sets)


def _check(inst):
    for s in inst.sets:
        if not s:
            raise EmptySetMember("hitting-set instance contains an empty set")


def _min_size(sets, limit):
    """Smallest k <= limit such that ``sets`` has a hitting set of size k, else None."""
    best = [limit + 1]

    def search(remaining, size):
        if size >= best[0]:
            return
        if not remaining:
            best[0] = size
            return
        if size + 1 >= best[0]:
            return
        pick = min(remaining, key=lambda s: (len(s), sorted(s)))
        for x in sorted(pick):
            search([s for s in remaining if x not in s], size + 1)

    search(list(sets), 0)
    return best[0] if best[0] <= limit else None


def solve_mhs(inst: HittingInstance) -> frozenset:
    """Minimum-cardinality hitting set; lexicographically smallest among ties.

    Branch and bound on the smallest uncovered set gives the optimum size k.
    The answer is then built one element at a time: the smallest element
    that still admits a completion of the right size among larger elements.
    """
    _check(inst)
    sets = list(dict.fromkeys(inst.sets))
    if not sets:
        return frozenset()
    k = _min_size(sets, len(inst.universe))
    chosen = []
    remaining = sets
    order = sorted(inst.universe)
    lo = 0
    for slot in range(k):
        left = k - slot - 1
        for i in range(lo, len(order)):
            x = order[i]
            rest = [s for s in remaining if x not in s]
            allowed = set(order[i + 1:])
            # every remaining set must be hittable by larger elements
            restricted = [s & allowed for s in rest]
            if any(not s for s in restricted):
                continue
            if not restricted or (left > 0 and _min_size(restricted, left) is not None):
                chosen.append(x)
                remaining = rest
                lo = i + 1
                break
        else:  # pragma: no cover - k is attainable by construction
            raise AssertionError("no completion found")
    return frozenset(chosen)


def brute_force_mhs(inst: HittingInstance) -> frozenset:
    """Reference solver: subsets by increasing size, lexicographic within a size."""
    _check(inst)
    if len(inst.universe) > 20:
        raise UniverseTooLarge(f"universe of {len(inst.universe)} elements is too large to enumerate")
    order = sorted(inst.universe)
    for k in range(len(order) + 1):
        for combo in itertools.combinations(order, k):
            if is_hitting_set(inst, combo):
                return frozenset(combo)
    raise AssertionError("unreachable: the universe hits every set")  # pragma: no cover
