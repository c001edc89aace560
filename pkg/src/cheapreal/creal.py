"""Computable reals as fast dyadic Cauchy sequences.

A :class:`CReal` is given by ``approx(n)``, a dyadic within 2^-n of the
real.  Cheap-pair and one-sided forms are constructors and views on top of
that representation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable

from . import expr as E
from .dyadic import Dyadic, ceil_log2, fraction_str, pow2, round_half_even
from .errors import (DivisionError, MuCapExceeded, NotSerializableError,
                     RenormalizationError)
from .infinitesimal import (EffectiveInfinitesimal, as_effective, canonical_eps,
                            effective_wrt)
from .seq import CheapNumber, as_cheap, from_function, running_inf, running_sup


class CReal:
    """A standard real x with |x - approx(n)| <= 2^-n."""

    def __init__(self, approx: Callable[[int], Dyadic], label: str = "real",
                 node: dict | None = None):
        self._fn = approx
        self.label = label
        self.node = node
        self._memo: dict[int, Dyadic] = {}
        self._lock = threading.Lock()

    def approx(self, n: int) -> Dyadic:
        n = E.as_nat(n, "precision")
        if n in self._memo:
            return self._memo[n]
        d = self._fn(n)
        if not isinstance(d, Dyadic):
            d = Dyadic.from_fraction(d)
        with self._lock:
            self._memo.setdefault(n, d)
        return d

    def approx_fraction(self, n: int) -> Fraction:
        return self.approx(n).to_fraction()

    def enclosure(self, n: int) -> tuple[Fraction, Fraction]:
        a = self.approx_fraction(n)
        return a - pow2(-n), a + pow2(-n)

    def to_json(self) -> dict:
        if self.node is None:
            raise NotSerializableError(f"real {self.label!r} has no expression form")
        return self.node

    def __repr__(self):
        return f"CReal({self.label})"

    def __str__(self):
        return self.label

    def __add__(self, o):
        return add(self, _as_real(o))

    def __radd__(self, o):
        return add(_as_real(o), self)

    def __sub__(self, o):
        return sub(self, _as_real(o))

    def __rsub__(self, o):
        return sub(_as_real(o), self)

    def __mul__(self, o):
        return mul(self, _as_real(o))

    def __rmul__(self, o):
        return mul(_as_real(o), self)

    def __neg__(self):
        return neg(self)


def _as_real(x) -> CReal:
    if isinstance(x, CReal):
        return x
    if isinstance(x, (int, Fraction)):
        return from_rational(x)
    raise TypeError(f"cannot use {x!r} as a computable real")


def round_at(q, n: int) -> Dyadic:
    """Nearest multiple of 2^-n (ties to even)."""
    return Dyadic.nearest(q, -n)


# -- embeddings ------------------------------------------------------------------


def from_rational(q) -> CReal:
    q = Fraction(q)
    return CReal(lambda n: round_at(q, n), fraction_str(q),
                 {"kind": "rational", "value": fraction_str(q)})


def from_dyadic_function(fn: Callable[[int], Dyadic], label: str = "real") -> CReal:
    return CReal(fn, label)


_WITNESS_CACHE: dict[int, object] = {}


def canonical_witness(eps: EffectiveInfinitesimal) -> CheapNumber:
    """Index w with eps^{+w} <= 2^-omega, or RenormalizationError."""
    key = id(eps.value)
    cached = _WITNESS_CACHE.get(key)
    if cached is not None and cached[0] is eps.value:
        return cached[1]
    w = effective_wrt(eps, canonical_eps().value)
    if w is None:
        raise RenormalizationError(f"no effectiveness witness for {eps.value} against 2^-omega")
    _WITNESS_CACHE[key] = (eps.value, w.index)
    return w.index


def renormalize(pq: CheapNumber, eps, target) -> tuple[int, int]:
    """Rescale a cheap approximation to precision ``target``.

    With nu = 2^ceil(log2(2/target)) and rank r where eps_r <= 1/nu, returns
    (p', nu) with p' = ceil(nu * pq_r), so |x - p'/nu| <= eps_r + 1/nu <= target
    whenever |x - pq| <= eps.
    """
    target = Fraction(target)
    if target <= 0:
        raise ValueError("target precision must be positive")
    eff = as_effective(eps)
    if eff is None:
        raise RenormalizationError(f"{eps} is not certified effective")
    j = max(ceil_log2(2 / target), 0)
    w = canonical_witness(eff)
    r = j + E.as_nat(w.at(j), "witness")
    v = Fraction(as_cheap(pq).at(r)) * (1 << j)
    return -((-v.numerator) // v.denominator), 1 << j


def from_cheap_pair(pq: CheapNumber, eps: EffectiveInfinitesimal | None = None) -> CReal:
    """The real x with |x - pq| <= eps, as a fast Cauchy sequence."""
    eff = canonical_eps() if eps is None else as_effective(eps)
    if eff is None:
        raise RenormalizationError(f"{eps} is not certified effective")
    canonical_witness(eff)

    def approx(n):
        p, nu = renormalize(pq, eff, pow2(-n))
        return Dyadic(p, -(nu.bit_length() - 1))

    try:
        node = {"kind": "cheap_pair", "pq": pq.to_json(), "eps": eff.value.to_json()}
    except NotSerializableError:
        node = None
    return CReal(approx, f"pair({pq})", node)


def to_cheap(x: CReal) -> tuple[CheapNumber, EffectiveInfinitesimal]:
    """The cheap rational with component approx(n), paired with 2^-omega."""
    seq = from_function(lambda n: x.approx_fraction(n), label=f"approx({x.label})")
    return seq, canonical_eps()


# -- field operations --------------------------------------------------------------


def add(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: round_at(x.approx_fraction(n + 2) + y.approx_fraction(n + 2), n),
                 f"({x} + {y})", _node("add", x, y))


def sub(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: round_at(x.approx_fraction(n + 2) - y.approx_fraction(n + 2), n),
                 f"({x} - {y})", _node("sub", x, y))


def neg(x: CReal) -> CReal:
    return CReal(lambda n: -x.approx(n), f"-{x}", _node("neg", x))


def _node(kind, *xs):
    if any(x.node is None for x in xs):
        return None
    return {"kind": kind, "children": [x.node for x in xs]}


def magnitude_bound(x: CReal) -> int:
    """Integer K with |x| <= K, from approx(0)."""
    a = abs(x.approx_fraction(0))
    return -((-a.numerator) // a.denominator) + 1


@dataclass(frozen=True)
class MulSchedule:
    bound: int  # K with |x|, |y| <= K
    operand_precision: int  # p, operands requested at 2^-p

    def product_error(self) -> Fraction:
        """(2K+1) * eps' with eps' = 2^-p."""
        return (2 * self.bound + 1) * pow2(-self.operand_precision)


def mul_schedule(x: CReal, y: CReal, n: int) -> MulSchedule:
    """Operand precision so that the exact product of approximations is
    within 2^-(n+2) of xy; the final rounding adds at most 2^-(n+2)."""
    k = max(magnitude_bound(x), magnitude_bound(y))
    return MulSchedule(k, n + 2 + ceil_log2(2 * k + 1))


def mul(x: CReal, y: CReal) -> CReal:
    def approx(n):
        s = mul_schedule(x, y, n)
        p = s.operand_precision
        return round_at(x.approx_fraction(p) * y.approx_fraction(p), n + 1)

    return CReal(approx, f"({x} * {y})", _node("mul", x, y))


def separation(y: CReal, evidence: int) -> Fraction:
    """Lower bound B on |y| from the evidence rank, or DivisionError."""
    a = abs(y.approx_fraction(evidence))
    if not a > pow2(-evidence + 1):
        raise DivisionError(
            f"|approx({evidence})| = {a} does not exceed 2^{-evidence + 1}; "
            f"{y} is not certified nonzero"
        )
    return a - pow2(-evidence)


def find_nonzero_evidence(y: CReal, cap: int = 64) -> int | None:
    for e in range(cap + 1):
        if abs(y.approx_fraction(e)) > pow2(-e + 1):
            return e
    return None


def reciprocal(y: CReal, evidence: int) -> CReal:
    b = separation(y, evidence)
    base = max(evidence, ceil_log2(2 / b))
    extra = ceil_log2(1 / (b * b))

    def approx(n):
        k = max(base, n + 3 + extra)
        return round_at(1 / y.approx_fraction(k), n + 1)

    return CReal(approx, f"1/{y}", None)


def div(x: CReal, y: CReal, nonzero_evidence: int) -> CReal:
    """x / y, given a rank at which y is visibly separated from zero."""
    r = mul(x, reciprocal(y, nonzero_evidence))
    node = _node("div", x, y)
    if node is not None:
        node["evidence"] = nonzero_evidence
    return CReal(r.approx, f"({x} / {y})", node)


# -- one-sided reals ------------------------------------------------------------------

LEFT = "Left"
RIGHT = "Right"


@dataclass(frozen=True, eq=False)
class OneSidedReal:
    """sup (Left) or inf (Right) of a computable rational sequence."""

    side: str
    seq: CheapNumber

    def __post_init__(self):
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")

    def running(self) -> CheapNumber:
        return running_sup(self.seq) if self.side == LEFT else running_inf(self.seq)

    def check_bounded(self, bound, upto: int = 1000) -> int | None:
        """First sampled rank with |seq_n| > bound, or None."""
        for n in range(upto):
            if abs(self.seq.at(n)) > bound:
                return n
        return None


def bracket_closing_rank(left: OneSidedReal, right: OneSidedReal, tol,
                         cap: int = E.DEFAULT_MU_CAP) -> int:
    """mu m [phi'(m) - phi(m) <= tol] for the running sup phi and inf phi'."""
    phi, phi2 = left.running(), right.running()
    tol = Fraction(tol)
    for m in range(cap):
        if phi2.at(m) - phi.at(m) <= tol:
            return m
    raise MuCapExceeded(-1, cap, "bracket search")


def join_sides(left: OneSidedReal, right: OneSidedReal,
               cap: int = E.DEFAULT_MU_CAP) -> CReal:
    """A real that is both left- and right-computable, as a CReal.

    approx(n) rounds phi(m) to 2^-(n+1), where m is the first rank with
    phi'(m) - phi(m) <= 2^-(n+1).
    """
    if left.side != LEFT or right.side != RIGHT:
        raise ValueError("join_sides needs a Left and a Right real")
    phi = left.running()

    def approx(n):
        m = bracket_closing_rank(left, right, pow2(-(n + 1)), cap)
        return round_at(phi.at(m), n + 1)

    return CReal(approx, f"join({left.seq}, {right.seq})", None)


def sqrt_rational(q) -> CReal:
    """sqrt(q) for rational q >= 0, joined from isqrt brackets."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("sqrt of a negative rational")

    def lo(m):
        return Fraction(isqrt((q * 4**m).__floor__()), 2**m)

    def hi(m):
        return lo(m) + Fraction(1, 2**m)

    left = OneSidedReal(LEFT, from_function(lo, f"isqrt-lo({q})"))
    right = OneSidedReal(RIGHT, from_function(hi, f"isqrt-hi({q})"))
    r = join_sides(left, right)
    return CReal(r.approx, f"sqrt({fraction_str(q)})",
                 {"kind": "sqrt", "value": fraction_str(q)})


# -- output and serialisation -----------------------------------------------------------


def digits(x: CReal, k: int) -> str:
    """Decimal enclosure "d ± 10^-k" with k fractional digits."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n = ceil_log2(Fraction(10**k)) + 2
    a = x.approx_fraction(n)
    d = round_half_even(a * 10**k)
    sign = "-" if d < 0 else ""
    whole, frac = divmod(abs(d), 10**k)
    radius = "0." + "0" * (k - 1) + "1"
    return f"{sign}{whole}.{frac:0{k}d} ± {radius}"


def from_json(obj: dict) -> CReal:
    kind = obj["kind"]
    if kind == "rational":
        return from_rational(Fraction(obj["value"]))
    if kind == "sqrt":
        return sqrt_rational(Fraction(obj["value"]))
    kids = [from_json(c) for c in obj.get("children", [])]
    if kind == "add":
        return add(*kids)
    if kind == "sub":
        return sub(*kids)
    if kind == "neg":
        return neg(*kids)
    if kind == "mul":
        return mul(*kids)
    if kind == "div":
        return div(kids[0], kids[1], int(obj["evidence"]))
    if kind == "cheap_pair":
        from .seq import from_expr
        from .infinitesimal import certify_monotone
        pq = from_expr(E.from_json(obj["pq"]))
        eps = certify_monotone(from_expr(E.from_json(obj["eps"])))
        return from_cheap_pair(pq, eps)
    raise ValueError(f"unknown real kind {kind!r}")
