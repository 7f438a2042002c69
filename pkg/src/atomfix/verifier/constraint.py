from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Constraint:
    """A CNF over guard constants whose literals are all negative.

    Each clause is a frozenset of guard ids read as "at least one of these
    guards is false".  The empty constraint is ``true``.
    """

    clauses: tuple = ()

    @classmethod
    def true(cls) -> "Constraint":
        return cls(())

    @classmethod
    def disable(cls, guards: Iterable[int]) -> "Constraint":
        return cls(tuple(frozenset([g]) for g in sorted(set(guards))))

    def conjoin(self, clause: Iterable[int]) -> "Constraint":
        clause = frozenset(clause)
        if not clause:
            raise ValueError("empty clause makes the constraint unsatisfiable")
        return Constraint(self.clauses + (clause,))

    def __and__(self, other: "Constraint") -> "Constraint":
        return Constraint(self.clauses + other.clauses)

    @property
    def disabled(self) -> frozenset:
        """Guards forced false by unit clauses."""
        return frozenset(next(iter(c)) for c in self.clauses if len(c) == 1)

    def residual(self) -> tuple:
        """Non-unit clauses not already satisfied by a unit clause, deduplicated."""
        off = self.disabled
        seen = []
        for c in self.clauses:
            if len(c) > 1 and not (c & off) and c not in seen:
                seen.append(c)
        return tuple(seen)

    def satisfied_by(self, true_guards: Iterable[int]) -> bool:
        """Whether the assignment making exactly ``true_guards`` true satisfies it."""
        on = frozenset(true_guards)
        return all(not c <= on for c in self.clauses)

    def implies(self, other: "Constraint") -> bool:
        """Entailment between all-negative CNFs.

        ``self => other`` iff every clause of ``other`` contains some clause of
        ``self``: the assignment making exactly a clause of ``other`` true
        falsifies it, so ``self`` must already be false there.
        """
        return all(any(a <= b for a in self.clauses) for b in other.clauses)

    def to_json(self) -> list:
        return [sorted(c) for c in self.clauses]

    def __str__(self) -> str:
        if not self.clauses:
            return "true"
        return " & ".join("(" + " | ".join(f"!cs{g}" for g in sorted(c)) + ")" for c in self.clauses)
