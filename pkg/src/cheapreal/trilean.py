"""Three-valued verdicts for budget-bounded semi-decisions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Trilean:
    """Outcome of checking an eventual property with a finite budget.

    ``witness_rank`` is the stabilisation point for TRUE and a refutation
    point for FALSE.  UNKNOWN means the budget ran out without a decision.
    """

    verdict: Verdict
    witness_rank: int | None = None
    budget_used: int = 0

    def __post_init__(self):
        if self.verdict is not Verdict.UNKNOWN and self.witness_rank is None:
            raise ValueError(f"{self.verdict.value} verdict needs a witness rank")

    @classmethod
    def true(cls, witness_rank: int, budget_used: int = 0) -> Trilean:
        return cls(Verdict.TRUE, witness_rank, budget_used)

    @classmethod
    def false(cls, witness_rank: int, budget_used: int = 0) -> Trilean:
        return cls(Verdict.FALSE, witness_rank, budget_used)

    @classmethod
    def unknown(cls, budget_used: int = 0) -> Trilean:
        return cls(Verdict.UNKNOWN, None, budget_used)

    @property
    def is_true(self) -> bool:
        return self.verdict is Verdict.TRUE

    @property
    def is_false(self) -> bool:
        return self.verdict is Verdict.FALSE

    @property
    def is_unknown(self) -> bool:
        return self.verdict is Verdict.UNKNOWN

    def __bool__(self):
        if self.is_unknown:
            raise ValueError("an UNKNOWN verdict has no truth value")
        return self.is_true

    def __invert__(self) -> Trilean:
        if self.is_true:
            return Trilean.false(self.witness_rank, self.budget_used)
        if self.is_false:
            return Trilean.true(self.witness_rank, self.budget_used)
        return self

    def __str__(self):
        return self.verdict.value.upper()

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "witness_rank": self.witness_rank,
            "budget_used": self.budget_used,
        }


def all_of(items: Iterable[Trilean]) -> Trilean:
    """Kleene conjunction; the witness of a TRUE result is the largest one."""
    items = list(items)
    used = sum(t.budget_used for t in items)
    for t in items:
        if t.is_false:
            return Trilean.false(t.witness_rank, used)
    if any(t.is_unknown for t in items):
        return Trilean.unknown(used)
    return Trilean.true(max((t.witness_rank for t in items), default=0), used)


def any_of(items: Iterable[Trilean]) -> Trilean:
    """Kleene disjunction."""
    items = list(items)
    used = sum(t.budget_used for t in items)
    for t in items:
        if t.is_true:
            return Trilean.true(t.witness_rank, used)
    if any(t.is_unknown for t in items):
        return Trilean.unknown(used)
    return Trilean.false(max((t.witness_rank for t in items), default=0), used)
