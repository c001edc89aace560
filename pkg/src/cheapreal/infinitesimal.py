"""Infinitesimals, infinitely large numbers and effectiveness witnesses.

An effectiveness witness for ``eps`` against ``y`` is a cheap index ``n``
with ``(eps^{+n})_k <= y_k`` at every rank ``k``.  Witnesses are built as
expression trees, so they stay computable cheap numbers and can be printed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import expr as E
from .errors import MuCapExceeded, TotalityError, UnverifiableError
from .seq import CheapNumber, as_cheap, eventually, lift, omega
from .trilean import Trilean

log = logging.getLogger(__name__)

# chained witnesses are validated only while their inner index stays below this
INDEX_LIMIT = 1 << 12

INFINITESIMAL = "Infinitesimal"
INFINITELY_LARGE = "InfinitelyLarge"
LIMITED = "Limited"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Classification:
    kind: str
    checked_up_to: int
    budget_used: int

    def to_json(self) -> dict:
        return {"kind": self.kind, "checked_up_to": self.checked_up_to,
                "budget_used": self.budget_used}


def ladder(budget: int) -> list[int]:
    """Standard test bounds 1, 2, 4, ..., 2^floor(log2 budget)."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    return [1 << i for i in range(budget.bit_length())]


def _all_hold(checks: Iterable[Trilean]) -> tuple[bool, int]:
    used = 0
    for t in checks:
        used += t.budget_used
        if not t.is_true:
            return False, used
    return True, used


def classify(x: CheapNumber, budget: int = 1000) -> Classification:
    """Budgeted classification against the standard ladder.

    Never claims more than was tested: ``checked_up_to`` is the largest
    standard bound k (or 1/k) that was confirmed.
    """
    x = as_cheap(x)
    ks = ladder(budget)
    total = 0

    def small(k):
        return eventually(lambda n: 0 < x.at(n) <= Fraction(1, k), budget)

    def large(k):
        return eventually(lambda n: x.at(n) >= k, budget)

    try:
        ok, used = _all_hold(small(k) for k in ks)
        total += used
        if ok:
            return Classification(INFINITESIMAL, ks[-1], total)
        ok, used = _all_hold(large(k) for k in ks)
        total += used
        if ok:
            return Classification(INFINITELY_LARGE, ks[-1], total)
        for k in ks:
            t = eventually(lambda n: abs(x.at(n)) <= k, budget)
            total += t.budget_used
            if t.is_true:
                return Classification(LIMITED, k, total)
    except TotalityError:
        pass
    return Classification(UNKNOWN, 0, total)


# -- certificates ------------------------------------------------------------------


@dataclass(frozen=True)
class Monotone:
    """eps_{n+1} <= eps_n at every rank."""

    kind: str = field(default="monotone", init=False)

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Equivalence:
    """Shift indices to and from a monotone representative.

    ``value^{+to_rep} <= rep`` and ``rep^{+from_rep} <= value``.
    """

    rep: "EffectiveInfinitesimal"
    to_rep: CheapNumber
    from_rep: CheapNumber
    kind: str = field(default="equivalence", init=False)

    def to_json(self):
        return {"kind": self.kind, "rep": self.rep.to_json(),
                "to_rep": self.to_rep.to_json(), "from_rep": self.from_rep.to_json()}


@dataclass(frozen=True, eq=False)
class EffectiveInfinitesimal:
    value: CheapNumber
    certificate: Monotone | Equivalence

    @property
    def is_monotone(self) -> bool:
        return isinstance(self.certificate, Monotone)

    def check(self, stop: int = 1000, start: int = 0) -> int | None:
        """First sampled rank violating the certificate, or None."""
        v = self.value
        for n in range(start, stop):
            if v.at(n) <= 0:
                return n
            if self.is_monotone and v.at(n + 1) > v.at(n):
                return n
        if not self.is_monotone:
            c = self.certificate
            bad = validate_witness(v, c.rep.value, c.to_rep, stop, start)
            if bad is None:
                bad = validate_witness(c.rep.value, v, c.from_rep, stop, start)
            return bad
        return None

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "certificate": self.certificate.to_json()}

    def __str__(self):
        return str(self.value)


def canonical_eps() -> EffectiveInfinitesimal:
    """2^-omega, the reference infinitesimal for precision bookkeeping."""
    e = E.Binary("pow", E.Const(2), E.Unary("neg", E.Rank()))
    return EffectiveInfinitesimal(CheapNumber(e, label="2^-omega"), Monotone())


def harmonic() -> EffectiveInfinitesimal:
    """1/(omega+1)."""
    e = E.Binary("div", E.Const(1), E.Binary("add", E.Rank(), E.Const(1)))
    return EffectiveInfinitesimal(CheapNumber(e, label="1/(omega+1)"), Monotone())


def certify_monotone(x: CheapNumber) -> EffectiveInfinitesimal | None:
    """Certify x as a positive decreasing infinitesimal from its expression shape."""
    try:
        p = E.profile(x.tree)
    except Exception:
        return None
    if p.direction == "dec" and p.positive:
        return EffectiveInfinitesimal(x, Monotone())
    return None


def as_effective(x) -> EffectiveInfinitesimal | None:
    if isinstance(x, EffectiveInfinitesimal):
        return x
    return certify_monotone(as_cheap(x))


# -- witnesses ----------------------------------------------------------------------


def _probe_tree(x: CheapNumber) -> E.Expr:
    """Tree used inside searches that probe x at many distant ranks.

    Going through the tree instead of a memoised reference keeps huge
    components (say 2^-k for large k) out of the memo table.  Opaque and
    patched numbers fall back to the reference.
    """
    if x.overrides:
        return x.ref()
    return x.expr


def dominate_witness(x: CheapNumber, y: CheapNumber, budget: int = 1000,
                     cap: int = E.DEFAULT_MU_CAP) -> CheapNumber:
    """Per-rank least shift s with x_{k+s} >= y_k (x infinitely large) or
    x_{k+s} <= y_k (x infinitesimal, y positive)."""
    x, y = as_cheap(x), as_cheap(y)
    c = classify(x, budget)
    if c.kind == INFINITELY_LARGE:
        op, wanted = ">=", "inc"
    elif c.kind == INFINITESIMAL:
        op, wanted = "<=", "dec"
    else:
        raise UnverifiableError(
            f"{x} is not confirmed infinitely large or infinitesimal within budget {budget} "
            f"(classified {c.kind})"
        )
    direction = E.profile(x.tree).direction
    search = "gallop" if direction == wanted else "linear"
    cond = E.Cmp(op, E.Shift(_probe_tree(x), E.Var("s")), y.ref())
    return CheapNumber(E.Mu("s", cond, cap, search), label=f"dominate({x}, {y})")


def harmonic_witness(y: CheapNumber) -> CheapNumber:
    """m_n = ceil(1/y_n) - 1, patched to 1 where y_n <= 0.

    Then 1/(omega+1) shifted by m is 1/(n + ceil(1/y_n)) <= y_n.
    """
    y = as_cheap(y)
    yr = y.ref()
    body = E.Binary("sub", E.Unary("ceil", E.Binary("div", E.Const(1), yr)), E.Const(1))
    e = E.NatCheck(E.Select(E.Cmp(">", yr, E.Const(0)), body, E.Const(1)))
    return CheapNumber(e, label=f"ceil(1/({y})) - 1")


def monotone_to_canonical(eps: EffectiveInfinitesimal | CheapNumber,
                          cap: int = E.DEFAULT_MU_CAP, search: str = "gallop") -> CheapNumber:
    """m'_n = mu m [eps_{n+m} <= 1/(n+1)] for a monotone infinitesimal eps.

    The predicate is safe (has a witness at every rank) because eps is an
    infinitesimal, and monotone in m because eps is decreasing; the latter
    licenses the galloping search.  Exceeding ``cap`` raises MuCapExceeded
    naming the rank.
    """
    e = eps if isinstance(eps, EffectiveInfinitesimal) else as_effective(eps)
    if e is None or not e.is_monotone:
        raise UnverifiableError(f"{eps} has no monotone certificate")
    log.debug("safety obligation: %s is a decreasing infinitesimal, so mu m "
              "[eps(n+m) <= 1/(n+1)] terminates at every rank", e.value)
    target = E.Binary("div", E.Const(1), E.Binary("add", E.Rank(), E.Const(1)))
    cond = E.Cmp("<=", E.Shift(_probe_tree(e.value), E.Var("m")), target)
    return CheapNumber(E.Mu("m", cond, cap, search), label=f"mu-witness({e.value})")


def chain(w1: CheapNumber, w2: CheapNumber) -> CheapNumber:
    """Compose eps^{+w1} <= eps' and eps'^{+w2} <= y into eps^{+w} <= y.

    w_n = w2_n + w1_{n + w2_n}; the plain sum w1 + w2 only works when w1
    is standard.
    """
    e = E.Binary("add", w2.ref(), E.Shift(w1.ref(), w2.ref()))
    return CheapNumber(e, label=f"chain({w1}, {w2})")


@dataclass(frozen=True, eq=False)
class Witness:
    index: CheapNumber
    construction: str  # reflexive, compEpsilon, monotone, chained, equivalence
    parts: tuple["Witness", ...] = ()
    validated_upto: int = 0

    def describe(self) -> str:
        if not self.parts:
            return self.construction
        return f"{self.construction}(" + ", ".join(p.describe() for p in self.parts) + ")"

    def to_json(self) -> dict:
        out = {"construction": self.construction, "index": self.index.to_json(),
               "validated_upto": self.validated_upto}
        if self.parts:
            out["parts"] = [p.to_json() for p in self.parts]
        return out


def validate_witness(eps: CheapNumber, y: CheapNumber, index: CheapNumber,
                     stop: int = 10**4, start: int = 0) -> int | None:
    """First rank k in [start, stop) with (eps^{+index})_k > y_k, else None.

    Exact rational comparisons; indices are evaluated through the tree of
    eps so shifted probes are not memoised.
    """
    eps, y = as_cheap(eps), as_cheap(y)
    tree = _probe_tree(eps)
    for k in range(start, stop):
        s = E.as_nat(index.at(k), "witness index", k)
        if tree.ev(k + s, {}) > y.at(k):
            return k
    return None


def feasible_stop(guard: CheapNumber | None, stop: int, limit: int = INDEX_LIMIT) -> int:
    """First rank below ``stop`` where ``guard`` exceeds ``limit`` (else ``stop``).

    Chained indices grow like iterated exponentials (2^-omega against a slow
    infinitesimal needs eps at rank about 2^(2^n)), so exact validation is
    only attempted while the inner index is small.
    """
    if guard is None:
        return stop
    for k in range(stop):
        if guard.at(k) > limit:
            return k
    return stop


def _looks_like(x: CheapNumber, model: CheapNumber, upto: int = 64) -> bool:
    try:
        return all(x.at(n) == model.at(n) for n in range(upto))
    except TotalityError:
        return False


def effective_wrt(eps, y, check_upto: int = 256) -> Witness | None:
    """A validated witness n with eps^{+n} <= y, or None.

    Constructions, in order: reflexive (n = 0), compEpsilon for eps =
    1/(omega+1), the monotone mu-witness for y = 1/(omega+1), a chain through
    1/(omega+1) for monotone eps, and the equivalence certificate of eps.
    Each candidate is validated exactly on ranks [0, check_upto); chains stop
    earlier, before their inner index exceeds INDEX_LIMIT.  The validated
    range is recorded in ``Witness.validated_upto``.
    """
    eff = as_effective(eps)
    eps_num = eff.value if eff is not None else as_cheap(eps)
    y = as_cheap(y.value if isinstance(y, EffectiveInfinitesimal) else y)
    h = harmonic().value

    def ok(w: Witness, guard: CheapNumber | None = None) -> Witness | None:
        try:
            stop = feasible_stop(guard, check_upto)
            bad = validate_witness(eps_num, y, w.index, stop)
        except (TotalityError, MuCapExceeded):
            return None
        if bad is not None or stop == 0:
            return None
        return Witness(w.index, w.construction, w.parts, stop)

    found = ok(Witness(lift(0), "reflexive"))
    if found:
        return found
    is_harmonic = _looks_like(eps_num, h)
    if is_harmonic:
        found = ok(Witness(harmonic_witness(y), "compEpsilon"))
        if found:
            return found
    if eff is not None and eff.is_monotone:
        mono = Witness(monotone_to_canonical(eff), "monotone")
        if _looks_like(y, h):
            found = ok(mono)
            if found:
                return found
        if not is_harmonic:
            comp = Witness(harmonic_witness(y), "compEpsilon")
            found = ok(Witness(chain(mono.index, comp.index), "chained", (mono, comp)),
                       comp.index)
            if found:
                return found
    if eff is not None and isinstance(eff.certificate, Equivalence):
        cert = eff.certificate
        inner = effective_wrt(cert.rep, y, check_upto)
        if inner is not None:
            first = Witness(cert.to_rep, "equivalence")
            found = ok(Witness(chain(cert.to_rep, inner.index), "chained", (first, inner)),
                       inner.index)
            if found:
                return found
    return None


def is_effective(eps, budget: int = 256) -> bool:
    return effective_wrt(eps, harmonic().value, budget) is not None


__all__ = [
    "Classification", "classify", "ladder", "Monotone", "Equivalence",
    "EffectiveInfinitesimal", "canonical_eps", "harmonic", "certify_monotone",
    "as_effective", "dominate_witness", "harmonic_witness", "monotone_to_canonical",
    "chain", "Witness", "validate_witness", "effective_wrt", "omega",
]
