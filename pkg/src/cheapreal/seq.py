"""Cheap numbers: total lazy sequences indexed by rank.

A :class:`CheapNumber` is a generator expression plus a finite override
table.  Components are memoised per number behind a lock, so numbers can be
shared between threads.  Predicates "for all sufficiently large rank" are
semi-decided with a budget and answered with a :class:`Trilean`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

from . import expr as E
from .dyadic import fraction_str
from .errors import CheapRealError, SortError, TotalityError
from .expr import Sort
from .trilean import Trilean

Value = int | Fraction


class CheapNumber:
    """x = (x_n): a total computable sequence of exact rationals."""

    __slots__ = ("expr", "sort", "overrides", "label", "_memo", "_table", "__weakref__")

    def __init__(self, expr: E.Expr, sort: Sort | None = None,
                 overrides: Mapping[int, Value] | None = None, label: str | None = None):
        self.expr = expr
        table = {}
        for k, v in (overrides or {}).items():
            table[E.as_nat(k, "override rank")] = E.norm(Fraction(v))
        self._table = dict(sorted(table.items()))
        self.overrides = MappingProxyType(self._table)
        if sort is None:
            sort = expr.sort()
            if sort is Sort.NAT and not all(
                isinstance(v, int) and v >= 0 for v in self.overrides.values()
            ):
                sort = Sort.RAT
        if sort is Sort.BOOL:
            raise SortError("a cheap number cannot be boolean-valued")
        self.sort = sort
        self.label = label
        self._memo: dict[int, Value] = {}

    # -- evaluation

    def at(self, n: int) -> Value:
        memo = self._memo
        if type(n) is int and n in memo:
            return memo[n]
        n = E.as_nat(n, "rank")
        if self._table and n in self._table:
            v = self._table[n]
        else:
            try:
                v = self.expr.ev(n, {})
            except CheapRealError:
                raise
            except (ArithmeticError, ValueError, TypeError) as exc:
                raise TotalityError(f"generator failed at rank {n}: {exc}", n) from exc
            if self.sort is Sort.NAT:
                v = E.as_nat(v, "component of a Nat-sorted number", n)
        # dict.setdefault is atomic; concurrent writers store the same value
        return memo.setdefault(n, v)

    __getitem__ = at

    def prefix(self, stop: int, start: int = 0) -> list[Value]:
        return [self.at(n) for n in range(start, stop)]

    # -- structure

    @property
    def tree(self) -> E.Expr:
        """The generator including the patch layer, as one expression."""
        if self.overrides:
            return E.Patch(self.expr, dict(self.overrides))
        return self.expr

    def ref(self) -> E.Expr:
        return E.Ref(self)

    def to_json(self) -> dict:
        return self.tree.to_json()

    def to_infix(self) -> str:
        return self.tree.infix()

    def __repr__(self):
        name = self.label
        if name is None:
            try:
                name = self.to_infix()
            except CheapRealError:
                name = "<opaque>"
        return f"CheapNumber({name}, {self.sort.value})"

    def __str__(self):
        return self.label or repr(self)

    # -- componentwise arithmetic

    def _bin(self, op: str, other, swap=False) -> CheapNumber:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b = (other, self) if swap else (self, other)
        return CheapNumber(E.Binary(op, a.ref(), b.ref()))

    def __add__(self, o):
        return self._bin("add", o)

    def __radd__(self, o):
        return self._bin("add", o, swap=True)

    def __sub__(self, o):
        return self._bin("sub", o)

    def __rsub__(self, o):
        return self._bin("sub", o, swap=True)

    def __mul__(self, o):
        return self._bin("mul", o)

    def __rmul__(self, o):
        return self._bin("mul", o, swap=True)

    def __truediv__(self, o):
        return self._bin("div", o)

    def __rtruediv__(self, o):
        return self._bin("div", o, swap=True)

    def __floordiv__(self, o):
        return self._bin("idiv", o)

    def __pow__(self, o):
        return self._bin("pow", o)

    def __rpow__(self, o):
        return self._bin("pow", o, swap=True)

    def __neg__(self):
        return CheapNumber(E.Unary("neg", self.ref()))

    def __abs__(self):
        return CheapNumber(E.Unary("abs", self.ref()))

    def monus(self, o) -> CheapNumber:
        return self._bin("monus", o)


def _coerce(x) -> CheapNumber | None:
    if isinstance(x, CheapNumber):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return lift(x)
    return None


def as_cheap(x) -> CheapNumber:
    c = _coerce(x)
    if c is None:
        raise TypeError(f"cannot use {x!r} as a cheap number")
    return c


# -- constructors ------------------------------------------------------------


def lift(c: Value) -> CheapNumber:
    """The standard number c as a constant sequence."""
    if isinstance(c, bool) or not isinstance(c, (int, Fraction)):
        raise TypeError(f"lift expects an int or Fraction, got {c!r}")
    return CheapNumber(E.Const(c))


def omega() -> CheapNumber:
    return CheapNumber(E.Rank(), label="omega")


def from_expr(e: E.Expr, label: str | None = None) -> CheapNumber:
    if isinstance(e, E.Patch):
        return CheapNumber(e.base, overrides=e.table, label=label)
    return CheapNumber(e, label=label)


def from_function(fn: Callable[[int], Value], label: str = "opaque",
                  sort: Sort = Sort.RAT) -> CheapNumber:
    """Wrap a Python callable (oracles, stubs).  Not serialisable."""
    return CheapNumber(E.Opaque(fn, label, sort), sort=sort, label=label)


_NAMED_EXPR = {"+": "add", "-": "sub", "*": "mul", "·": "mul", "/": "div",
               "monus": "monus", "min": "min", "max": "max"}


def map_total(f: str | Callable, *xs: CheapNumber, label: str | None = None,
              sort: Sort | None = None) -> CheapNumber:
    """Apply a standard total function componentwise.

    ``f`` is either the name of a basis operation (kept serialisable) or a
    Python callable.  A failure of ``f`` on some component tuple is reported
    as :class:`TotalityError`.
    """
    xs = tuple(as_cheap(x) for x in xs)
    if isinstance(f, str):
        if f in _NAMED_EXPR and len(xs) == 2:
            return CheapNumber(E.Binary(_NAMED_EXPR[f], xs[0].ref(), xs[1].ref()), label=label)
        if f in E.UNARY_OPS and len(xs) == 1:
            return CheapNumber(E.Unary(f, xs[0].ref()), label=label)
        raise ValueError(f"unknown basis operation {f!r} for {len(xs)} arguments")

    def gen(n):
        args = [x.at(n) for x in xs]
        try:
            return f(*args)
        except (ArithmeticError, ValueError, TypeError) as exc:
            raise TotalityError(f"{getattr(f, '__name__', f)} undefined at rank {n} "
                                f"on {args}: {exc}", n) from exc

    name = label or f"{getattr(f, '__name__', 'f')}({', '.join(map(str, xs))})"
    if sort is None:
        sort = Sort.RAT
    return CheapNumber(E.Opaque(gen, name, sort), sort=sort, label=name)


def patch(x: CheapNumber, overrides: Mapping[int, Value]) -> CheapNumber:
    """x with finitely many components replaced."""
    merged = dict(x.overrides)
    merged.update(overrides)
    return CheapNumber(x.expr, overrides=merged, label=None)


def shift_unary(x: CheapNumber) -> CheapNumber:
    """x⁺ with (x⁺)_n = x_{n+1}."""
    return CheapNumber(E.Shift(x.ref(), E.Const(1)), sort=x.sort)


def shift_binary(x: CheapNumber, y: CheapNumber) -> CheapNumber:
    """x^{+y} with (x^{+y})_n = x_{n + y_n}.

    The index y must be natural-valued; this is checked per component and a
    violation raises :class:`SortError`.
    """
    y = as_cheap(y)
    return CheapNumber(E.Shift(x.ref(), y.ref()), sort=x.sort)


def compose(x: CheapNumber, y: CheapNumber) -> CheapNumber:
    """x(y): the component of x at rank y_n."""
    return CheapNumber(E.Compose(x.ref(), as_cheap(y).ref()), sort=x.sort)


def index_sum(y: CheapNumber, z: CheapNumber) -> CheapNumber:
    """The index w = z + y^{+z}, so that x^{+w} = (x^{+y})^{+z} for every x.

    For standard y this is just y + z.  For a non-standard y the plain sum
    does not compose shifts (take x = y = z = omega).
    """
    y, z = as_cheap(y), as_cheap(z)
    return CheapNumber(E.Binary("add", z.ref(), E.Shift(y.ref(), z.ref())))


def guarded_div(x: CheapNumber, y: CheapNumber, from_rank: int,
                fill: Value = 0) -> CheapNumber:
    """x / y for ranks >= from_rank, ``fill`` below (the divisor is certified there)."""
    return CheapNumber(E.GuardedDiv(as_cheap(x).ref(), as_cheap(y).ref(), from_rank, fill))


def running_inf(x: CheapNumber) -> CheapNumber:
    """min(x_0, ..., x_n): non-increasing; its infimum is right-computable."""
    return CheapNumber(E.Running("min", x.ref()), sort=x.sort)


def running_sup(x: CheapNumber) -> CheapNumber:
    """max(x_0, ..., x_n): non-decreasing; its supremum is left-computable."""
    return CheapNumber(E.Running("max", x.ref()), sort=x.sort)


def solve_shift_equation(step: E.Expr, init: Value, var: str = "v") -> CheapNumber:
    """The unique x with x_0 = init and x⁺ = step(x, omega)."""
    return CheapNumber(E.Iterate(var, step, E.Const(init)))


# -- budgeted eventual predicates ----------------------------------------------


def window_start(budget: int) -> int:
    """First rank of the trailing evidence window [s, budget]."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    return budget + 1 - math.ceil((budget + 1) / 4)


@dataclass(frozen=True)
class Scan:
    """Truth values of a componentwise predicate on ranks 0..budget."""

    holds: tuple[bool, ...]

    @property
    def budget(self) -> int:
        return len(self.holds) - 1

    def last_violation(self) -> int | None:
        for n in range(len(self.holds) - 1, -1, -1):
            if not self.holds[n]:
                return n
        return None

    def violations_in(self, start: int) -> list[int]:
        return [n for n in range(start, len(self.holds)) if not self.holds[n]]


def scan(pred: Callable[[int], bool], budget: int) -> Scan:
    return Scan(tuple(bool(pred(n)) for n in range(budget + 1)))


def eventually(pred: Callable[[int], bool], budget: int, *,
               refute: Callable[[Scan, int], int | None] | None = None) -> Trilean:
    """Semi-decide "pred holds for all sufficiently large ranks".

    TRUE when pred holds on the whole trailing window; the witness is one
    past the last violation.  Otherwise ``refute(scan, start)`` decides
    between FALSE (returns a refutation rank) and UNKNOWN (returns None).
    By default two or more violations inside the window count as recurrent.
    """
    s = scan(pred, budget)
    start = window_start(budget)
    used = budget + 1
    last = s.last_violation()
    if last is None:
        return Trilean.true(0, used)
    if last < start:
        return Trilean.true(last + 1, used)
    if refute is None:
        refute = _recurrent
    r = refute(s, start)
    if r is None:
        return Trilean.unknown(used)
    return Trilean.false(r, used)


def _recurrent(s: Scan, start: int) -> int | None:
    bad = s.violations_in(start)
    return bad[-1] if len(bad) >= 2 else None


def _persistent(s: Scan, start: int) -> int | None:
    bad = s.violations_in(start)
    return start if len(bad) == len(s.holds) - start else None


def eventually_eq(x: CheapNumber, y: CheapNumber, budget: int) -> Trilean:
    """Budgeted check of x = y after some finite rank."""
    x, y = as_cheap(x), as_cheap(y)
    return eventually(lambda n: x.at(n) == y.at(n), budget)


def eventually_leq(x: CheapNumber, y: CheapNumber, budget: int) -> Trilean:
    """Budgeted check of x <= y after some finite rank.

    FALSE is reported only when x > y throughout the evidence window, i.e.
    when the opposite strict order is observed to hold eventually.  A
    pattern that keeps switching (such as (-1)^n against 0) stays UNKNOWN.
    """
    x, y = as_cheap(x), as_cheap(y)
    return eventually(lambda n: x.at(n) <= y.at(n), budget, refute=_persistent)


def eventually_lt(x: CheapNumber, y: CheapNumber, budget: int) -> Trilean:
    x, y = as_cheap(x), as_cheap(y)
    return eventually(lambda n: x.at(n) < y.at(n), budget, refute=_persistent)


def disagreement_set(x: CheapNumber, y: CheapNumber, budget: int) -> list[int]:
    x, y = as_cheap(x), as_cheap(y)
    return [n for n in range(budget + 1) if x.at(n) != y.at(n)]


def agreement_set_cofinite(x: CheapNumber, y: CheapNumber, budget: int) -> Trilean:
    """Is {n : x_n = y_n} compatible with being cofinite (a Fréchet-filter member)?

    Cofiniteness of the agreement set is exactly eventual equality, so the
    verdict policy is the one of :func:`eventually_eq`.
    """
    return eventually_eq(x, y, budget)


def holds_on(pred: Callable[[int], bool], ranks: Iterable[int]) -> bool:
    return all(pred(n) for n in ranks)


def render(v: Value) -> str:
    return fraction_str(v)
