"""Computable functions on compact intervals.

A :class:`CFunc` pairs a uniform approximation ``psi(d, n)`` (within 2^-n
of f(d) for rationals d of the domain) with a modulus of continuity ``m``
(|x - y| <= 2^-m(n) implies |f(x) - f(y)| <= 2^-n).  Functions built from
:class:`FuncExpr` trees get both parts synthesised: psi by error-tracked
exact evaluation, m from an interval bound on the derivative.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .creal import CReal, find_nonzero_evidence, from_json as real_from_json
from .creal import from_rational, reciprocal, round_at
from .dyadic import Dyadic, ceil_log2, fraction_str, pow2
from .errors import CompositionRangeError, DomainError, ParseError
from .interval import Interval
from .seq import window_start
from .trilean import Trilean

# -- expression trees ------------------------------------------------------------


class FuncExpr:
    def value(self, x: Fraction, p: int) -> tuple[Fraction, Fraction]:
        """Approximate f(x) with constants at precision 2^-p; returns (v, err)."""
        raise NotImplementedError

    def exact(self, x: Fraction) -> Fraction | None:
        """f(x) exactly when every constant is rational, else None."""
        raise NotImplementedError

    def range(self, X: Interval, p: int) -> Interval:
        """Natural interval extension (constants widened by 2^-p)."""
        raise NotImplementedError

    def deriv_range(self, X: Interval, p: int) -> Interval:
        raise NotImplementedError

    def children(self) -> tuple[FuncExpr, ...]:
        return ()

    def to_json(self) -> dict:
        raise NotImplementedError

    def infix(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.infix()

    def __add__(self, o):
        return Add(self, _lift(o))

    def __radd__(self, o):
        return Add(_lift(o), self)

    def __sub__(self, o):
        return Sub(self, _lift(o))

    def __rsub__(self, o):
        return Sub(_lift(o), self)

    def __mul__(self, o):
        return Mul(self, _lift(o))

    def __rmul__(self, o):
        return Mul(_lift(o), self)

    def __pow__(self, k: int):
        return power(self, k)


def _lift(o) -> FuncExpr:
    if isinstance(o, FuncExpr):
        return o
    if isinstance(o, (int, Fraction)):
        return Const.rational(o)
    if isinstance(o, CReal):
        return Const.of(o)
    raise TypeError(f"cannot use {o!r} in a function expression")


@dataclass(frozen=True, eq=False)
class Const(FuncExpr):
    real: CReal
    exact_value: Fraction | None = None

    @classmethod
    def rational(cls, q) -> Const:
        q = Fraction(q)
        return cls(from_rational(q), q)

    @classmethod
    def of(cls, r: CReal) -> Const:
        node = r.node or {}
        if node.get("kind") == "rational":
            return cls.rational(Fraction(node["value"]))
        return cls(r, None)

    def exact(self, x):
        return self.exact_value

    def _approx(self, p):
        if self.exact_value is not None:
            return self.exact_value, Fraction(0)
        return self.real.approx_fraction(p), pow2(-p)

    def value(self, x, p):
        return self._approx(p)

    def range(self, X, p):
        v, e = self._approx(p)
        return Interval(v - e, v + e)

    def deriv_range(self, X, p):
        return Interval.point(0)

    def to_json(self):
        return {"kind": "const", "value": self.real.to_json()}

    def infix(self):
        if self.exact_value is not None:
            s = fraction_str(self.exact_value)
            return s if self.exact_value >= 0 and "/" not in s else f"({s})"
        return self.real.label


def exact_at(e: FuncExpr, x: Fraction) -> Fraction | None:
    return e.exact(x)


@dataclass(frozen=True, eq=False)
class Identity(FuncExpr):
    def value(self, x, p):
        return Fraction(x), Fraction(0)

    def exact(self, x):
        return Fraction(x)

    def range(self, X, p):
        return X

    def deriv_range(self, X, p):
        return Interval.point(1)

    def to_json(self):
        return {"kind": "x"}

    def infix(self):
        return "x"


@dataclass(frozen=True, eq=False)
class Add(FuncExpr):
    left: FuncExpr
    right: FuncExpr

    def value(self, x, p):
        a, ea = self.left.value(x, p)
        b, eb = self.right.value(x, p)
        return a + b, ea + eb

    def exact(self, x):
        a, b = exact_at(self.left, x), exact_at(self.right, x)
        return None if a is None or b is None else a + b

    def range(self, X, p):
        return self.left.range(X, p) + self.right.range(X, p)

    def deriv_range(self, X, p):
        return self.left.deriv_range(X, p) + self.right.deriv_range(X, p)

    def children(self):
        return (self.left, self.right)

    def to_json(self):
        return {"kind": "add", "children": [self.left.to_json(), self.right.to_json()]}

    def infix(self):
        return f"({self.left.infix()} + {self.right.infix()})"


@dataclass(frozen=True, eq=False)
class Sub(FuncExpr):
    left: FuncExpr
    right: FuncExpr

    def value(self, x, p):
        a, ea = self.left.value(x, p)
        b, eb = self.right.value(x, p)
        return a - b, ea + eb

    def exact(self, x):
        a, b = exact_at(self.left, x), exact_at(self.right, x)
        return None if a is None or b is None else a - b

    def range(self, X, p):
        return self.left.range(X, p) - self.right.range(X, p)

    def deriv_range(self, X, p):
        return self.left.deriv_range(X, p) - self.right.deriv_range(X, p)

    def children(self):
        return (self.left, self.right)

    def to_json(self):
        return {"kind": "sub", "children": [self.left.to_json(), self.right.to_json()]}

    def infix(self):
        return f"({self.left.infix()} - {self.right.infix()})"


@dataclass(frozen=True, eq=False)
class Mul(FuncExpr):
    left: FuncExpr
    right: FuncExpr

    def value(self, x, p):
        a, ea = self.left.value(x, p)
        b, eb = self.right.value(x, p)
        return a * b, abs(a) * eb + abs(b) * ea + ea * eb

    def exact(self, x):
        a, b = exact_at(self.left, x), exact_at(self.right, x)
        return None if a is None or b is None else a * b

    def range(self, X, p):
        if self.left is self.right:
            return self.left.range(X, p) ** 2
        return self.left.range(X, p) * self.right.range(X, p)

    def deriv_range(self, X, p):
        return (self.left.deriv_range(X, p) * self.right.range(X, p)
                + self.left.range(X, p) * self.right.deriv_range(X, p))

    def children(self):
        return (self.left, self.right)

    def to_json(self):
        return {"kind": "mul", "children": [self.left.to_json(), self.right.to_json()]}

    def infix(self):
        return f"({self.left.infix()} * {self.right.infix()})"


@dataclass(frozen=True, eq=False)
class Poly(FuncExpr):
    """sum_k coeffs[k] * x^k."""

    coeffs: tuple[Const, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(_lift(c) for c in self.coeffs))

    def value(self, x, p):
        x = Fraction(x)
        v, e, xk = Fraction(0), Fraction(0), Fraction(1)
        for c in self.coeffs:
            cv, ce = c.value(x, p)
            v += cv * xk
            e += ce * abs(xk)
            xk *= x
        return v, e

    def exact(self, x):
        vals = [c.exact_value for c in self.coeffs]
        if any(v is None for v in vals):
            return None
        acc = Fraction(0)
        for c in reversed(vals):
            acc = acc * x + c
        return acc

    def _sum(self, X, p, coeffs, offset=0):
        acc = Interval.point(0)
        for k, c in enumerate(coeffs):
            term = c.range(X, p) * (X ** (k + offset) if k + offset else Interval.point(1))
            acc = acc + term
        return acc

    def range(self, X, p):
        return self._sum(X, p, self.coeffs)

    def deriv_range(self, X, p):
        acc = Interval.point(0)
        for k, c in enumerate(self.coeffs[1:], start=1):
            acc = acc + c.range(X, p).scale(k) * (X ** (k - 1))
        return acc

    def children(self):
        return self.coeffs

    def to_json(self):
        return {"kind": "poly", "coeffs": [c.to_json() for c in self.coeffs]}

    def infix(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c.exact_value == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if not mono:
                terms.append(c.infix())
            elif c.exact_value == 1:
                terms.append(mono)
            else:
                terms.append(f"{c.infix()}*{mono}")
        return "(" + (" + ".join(terms) or "0") + ")"


@dataclass(frozen=True, eq=False)
class Compose(FuncExpr):
    """outer(inner(x)); outer is only trusted on ``outer_domain``."""

    outer: FuncExpr
    inner: FuncExpr
    outer_domain: Interval

    def value(self, x, p):
        v, e = self.inner.value(x, p)
        if not Interval.around(v, e).intersect(self.outer_domain):
            raise CompositionRangeError(
                f"inner value {v} ± {e} of {self.inner.infix()} leaves {self.outer_domain}"
            )
        w, ew = self.outer.value(v, p)
        if e:
            lip = self.outer.deriv_range(Interval.around(v, e), p).mag
            ew += lip * e
        return w, ew

    def exact(self, x):
        v = exact_at(self.inner, x)
        return None if v is None else exact_at(self.outer, v)

    def range(self, X, p):
        return self.outer.range(self.inner.range(X, p), p)

    def deriv_range(self, X, p):
        return self.outer.deriv_range(self.inner.range(X, p), p) * self.inner.deriv_range(X, p)

    def children(self):
        return (self.outer, self.inner)

    def to_json(self):
        return {"kind": "compose", "domain": [fraction_str(self.outer_domain.lo),
                                              fraction_str(self.outer_domain.hi)],
                "children": [self.outer.to_json(), self.inner.to_json()]}

    def infix(self):
        return f"compose({self.outer.infix()}, {self.inner.infix()})"


def power(base: FuncExpr, k: int) -> FuncExpr:
    if k < 0:
        raise ValueError("negative powers are not in the expression basis")
    if isinstance(base, Identity):
        return Poly(tuple([Const.rational(0)] * k + [Const.rational(1)]))
    if k == 0:
        return Const.rational(1)
    out = base
    for _ in range(k - 1):
        out = Mul(out, base)
    return out


def reciprocal_const(c: Const, pos: int = 0, text: str = "") -> CReal:
    if c.exact_value is not None:
        if c.exact_value == 0:
            raise ParseError("division by zero", pos, text)
        return from_rational(1 / c.exact_value)
    e = find_nonzero_evidence(c.real, 64)
    if e is None:
        raise ParseError("divisor not separated from zero up to precision 2^-64", pos, text)
    return reciprocal(c.real, e)


def func_from_json(obj: dict) -> FuncExpr:
    kind = obj["kind"]
    if kind == "x":
        return Identity()
    if kind == "const":
        return Const.of(real_from_json(obj["value"]))
    if kind == "poly":
        return Poly(tuple(func_from_json(c) for c in obj["coeffs"]))
    kids = [func_from_json(c) for c in obj.get("children", [])]
    if kind == "add":
        return Add(*kids)
    if kind == "sub":
        return Sub(*kids)
    if kind == "mul":
        return Mul(*kids)
    if kind == "compose":
        lo, hi = (Fraction(v) for v in obj["domain"])
        return Compose(kids[0], kids[1], Interval(lo, hi))
    raise ValueError(f"unknown function expression kind {kind!r}")


# -- computable functions ------------------------------------------------------------


def _enclosure_precision(X: Interval) -> int:
    if X.width == 0:
        return 64
    return max(40, 16 - ceil_log2(X.width))


def enclose(e: FuncExpr, X: Interval) -> Interval:
    """Range of e over X: natural form intersected with the mean-value form."""
    p = _enclosure_precision(X)
    natural = e.range(X, p)
    if X.width == 0:
        return natural
    m = X.mid
    v, err = e.value(m, p)
    slope = e.deriv_range(X, p)
    mv = Interval(v - err, v + err) + slope * (X - Interval.point(m))
    return natural.intersect(mv) or natural


@dataclass(frozen=True, eq=False)
class CFunc:
    domain: tuple[Fraction, Fraction]
    psi: Callable[[Fraction, int], Dyadic]
    modulus: Callable[[int], int]
    expr: FuncExpr | None = None
    enclose: Callable[[Fraction, Fraction], Interval] | None = None
    label: str = "f"
    lipschitz: Fraction | None = field(default=None)

    def __post_init__(self):
        a, b = (Fraction(v) for v in self.domain)
        if a > b:
            raise ValueError(f"empty domain [{a}, {b}]")
        object.__setattr__(self, "domain", (a, b))

    @property
    def a(self) -> Fraction:
        return self.domain[0]

    @property
    def b(self) -> Fraction:
        return self.domain[1]

    def in_domain(self, x) -> bool:
        return self.a <= x <= self.b

    def psi_fraction(self, d, n: int) -> Fraction:
        v = self.psi(Fraction(d), n)
        return v.to_fraction() if isinstance(v, Dyadic) else Fraction(v)

    def to_json(self) -> dict:
        out = {"domain": [fraction_str(self.a), fraction_str(self.b)], "label": self.label}
        if self.expr is not None:
            out["expr"] = self.expr.to_json()
        return out

    def __str__(self):
        return self.label


def _check_compositions(e: FuncExpr, X: Interval, p: int = 64) -> None:
    if isinstance(e, Compose):
        _check_compositions(e.inner, X, p)
        r = enclose(e.inner, X)
        if not r.within(e.outer_domain):
            raise CompositionRangeError(
                f"range {r} of inner expression {e.inner.infix()} is not inside "
                f"the outer domain {e.outer_domain}"
            )
        _check_compositions(e.outer, e.outer_domain, p)
        return
    for c in e.children():
        _check_compositions(c, X, p)


def make_psi(e: FuncExpr, domain: tuple[Fraction, Fraction]):
    a, b = domain

    def psi(d, n):
        d = Fraction(d)
        if not a <= d <= b:
            raise DomainError(f"{d} is outside [{a}, {b}]")
        v = exact_at(e, d)
        if v is not None:
            return round_at(v, n + 1)
        p = n + 4
        while True:
            v, err = e.value(d, p)
            if err <= pow2(-(n + 2)):
                return round_at(v, n + 1)
            p += max(4, ceil_log2(err * 2 ** (n + 2)) + 1)

    return psi


def lipschitz_bound(e: FuncExpr, domain: tuple[Fraction, Fraction]) -> Fraction:
    X = Interval(*domain)
    return e.deriv_range(X, 64).mag


def synthesize(e: FuncExpr, domain, label: str | None = None) -> CFunc:
    """CFunc for e on [a, b] with modulus n + ceil(log2(max(L, 1)))."""
    a, b = (Fraction(v) for v in domain)
    if a > b:
        raise ValueError(f"empty domain [{a}, {b}]")
    X = Interval(a, b)
    _check_compositions(e, X)
    lip = lipschitz_bound(e, (a, b))
    shift = ceil_log2(max(lip, Fraction(1)))

    def modulus(n):
        return n + shift

    def enc(lo, hi):
        return enclose(e, Interval(lo, hi))

    return CFunc((a, b), make_psi(e, (a, b)), modulus, e, enc,
                 label or f"{e.infix()} on [{fraction_str(a)}, {fraction_str(b)}]", lip)


def evaluate(f: CFunc, x: CReal, n: int) -> Dyadic:
    """f(x) within 2^-n: psi(x.approx(m(n+1)), n+1), clamped to the domain."""
    m = f.modulus(n + 1)
    d = x.approx_fraction(m)
    r = pow2(-m)
    if d + r < f.a or d - r > f.b:
        raise DomainError(f"enclosure [{d - r}, {d + r}] of {x} misses the domain "
                          f"[{f.a}, {f.b}]")
    d = min(max(d, f.a), f.b)
    return f.psi(d, n + 1)


# -- checkers ----------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    n: int
    x: Fraction
    y: Fraction
    observed: Fraction
    bound: Fraction

    def to_json(self) -> dict:
        return {"n": self.n, "x": fraction_str(self.x), "y": fraction_str(self.y),
                "observed": fraction_str(self.observed), "bound": fraction_str(self.bound)}


def check_modulus(f: CFunc, n_max: int = 12, samples: int = 1000,
                  seed: int = 0) -> list[Violation]:
    """Sample pairs at distance 2^-m(n) and report |psi(x) - psi(y)| above
    2^-n + 2^-(n+1) (the slack covers two psi errors at rank n+2)."""
    rng = random.Random(seed)
    a, b = f.a, f.b
    per = max(1, samples // (n_max + 1))
    out = []
    for n in range(n_max + 1):
        delta = pow2(-f.modulus(n))
        bound = pow2(-n) + pow2(-(n + 1))
        pairs = []
        if b - a >= delta:
            pairs += [(a, a + delta), (b - delta, b)]
        grid = 1 << (f.modulus(n) + 4)
        for _ in range(per):
            x = a + (b - a) * Fraction(rng.randrange(grid + 1), grid)
            y = x + delta if x + delta <= b else x - delta
            y = min(max(y, a), b)
            pairs.append((x, y))
        for x, y in pairs:
            obs = abs(f.psi_fraction(x, n + 2) - f.psi_fraction(y, n + 2))
            if obs > bound:
                out.append(Violation(n, x, y, obs, bound))
    return out


def _verdict(diffs: Sequence[Fraction], budget: int, separation=Fraction(1, 2)) -> Trilean:
    """Shared verdict for continuity checks from per-rank differences.

    TRUE if the differences end below 1/k on the trailing window for every
    k of the ladder up to 2^(floor(log2 budget) // 2); FALSE if they stay
    above ``separation`` on the whole window; UNKNOWN otherwise.
    """
    start = window_start(budget)
    window = diffs[start:]
    used = len(diffs)
    top = 1 << ((budget.bit_length() - 1) // 2)
    if max(window) <= Fraction(1, top):
        last = max((i for i, d in enumerate(diffs) if d > Fraction(1, top)), default=-1)
        return Trilean.true(last + 1, used)
    if min(window) > separation:
        return Trilean.false(start, used)
    return Trilean.unknown(used)


def _clamp(f: CFunc, v: Fraction) -> Fraction:
    return min(max(v, f.a), f.b)


def check_continuity_at(f: CFunc, x: CReal, budget: int = 1000) -> Trilean:
    """Budgeted test of f(x + h) ~ f(x) for the infinitesimal h = ±1/(omega+1)."""
    diffs = []
    for n in range(budget + 1):
        xn = _clamp(f, x.approx_fraction(n))
        fx = f.psi_fraction(xn, n)
        h = Fraction(1, n + 1)
        d = Fraction(0)
        for y in (xn + h, xn - h):
            if f.in_domain(y):
                d = max(d, abs(f.psi_fraction(y, n) - fx))
        diffs.append(d)
    return _verdict(diffs, budget)


def grid_pairs(f: CFunc, n: int, points: int = 8) -> list[tuple[Fraction, Fraction]]:
    """Moving pairs (x, x + 1/(n+1)) on a rank-dependent grid of the domain."""
    a, b = f.a, f.b
    h = Fraction(1, n + 1)
    span = max(b - a - h, Fraction(0))
    out = []
    for i in range(points):
        t = (Fraction(i, points) + Fraction(n % points, points * points))
        x = a + span * t
        out.append((x, min(x + h, b)))
    return out


def check_uniform_continuity(f: CFunc, budget: int = 1000,
                             scheme: Callable[[int], Sequence[tuple]] | None = None) -> Trilean:
    """Budgeted test of f(x) ~ f(y) for all moving pairs x ~ y.

    ``scheme(n)`` supplies the pairs at rank n; the default walks a grid.
    """
    pick = scheme or (lambda n: grid_pairs(f, n))
    diffs = []
    for n in range(budget + 1):
        d = Fraction(0)
        for x, y in pick(n):
            d = max(d, abs(f.psi_fraction(x, n) - f.psi_fraction(y, n)))
        diffs.append(d)
    return _verdict(diffs, budget)
