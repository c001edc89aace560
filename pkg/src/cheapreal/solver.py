"""Grid procedures for zeros and maxima of computable functions.

The domain is mapped affinely onto [0, 1].  At rank n the grid has
N_n = max(n, 2^m(n)) + 1 points k/N_n where m is the modulus of the rescaled
function, and eps_n = 2^-n.  Candidate sets are searched by branch and
bound over interval enclosures when the function provides them, so the
minimal index is found without scanning the whole grid.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

from .cfunc import CFunc
from .creal import CReal, LEFT, RIGHT, OneSidedReal, round_at
from .dyadic import Dyadic, ceil_log2, fraction_str, pow2
from .errors import SignConditionError, StuckIntervalError, UnverifiableError
from .infinitesimal import INFINITESIMAL, LIMITED, classify
from .interval import Interval
from .seq import CheapNumber, from_function, running_inf, running_sup

LEFT_COMPUTABLE = "LeftComputable"
RIGHT_COMPUTABLE = "RightComputable"

EVIDENCE_CAP = 64
LINEAR_SCAN_LIMIT = 1 << 16
_LEAF = 8


# -- rescaling -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Rescaled:
    """g(t) = sign * f(a + (b - a) t) on [0, 1]."""

    f: CFunc
    sign: int = 1

    @property
    def width(self) -> Fraction:
        return self.f.b - self.f.a

    def to_x(self, t) -> Fraction:
        return self.f.a + self.width * Fraction(t)

    def psi(self, t, n: int) -> Fraction:
        return self.sign * self.f.psi_fraction(self.to_x(t), n)

    def modulus(self, n: int) -> int:
        return self.f.modulus(n) + max(0, ceil_log2(max(self.width, Fraction(1))))

    def grid_size(self, n: int) -> int:
        return max(n, 1 << self.modulus(n), 1)

    def enclose(self, t1, t2) -> Interval | None:
        if self.f.enclose is None:
            return None
        r = self.f.enclose(self.to_x(t1), self.to_x(t2))
        return r if self.sign > 0 else -r


def sign_evidence(f: CFunc, cap: int = EVIDENCE_CAP) -> tuple[int, int]:
    """(rank e, sign s) with s*f(a) < 0 < s*f(b) certified by psi at rank e."""
    last = None
    for e in range(cap + 1):
        pa, pb = f.psi_fraction(f.a, e), f.psi_fraction(f.b, e)
        last = (e, pa, pb)
        gap = 2 * pow2(-e)
        if abs(pa) > gap and abs(pb) > gap:
            if (pa < 0) == (pb < 0):
                raise SignConditionError(
                    f"no sign change: f({f.a}) in {_enc(pa, e)}, f({f.b}) in {_enc(pb, e)}"
                )
            return e, (1 if pa < 0 else -1)
    e, pa, pb = last
    raise SignConditionError(
        f"sign condition unverifiable up to rank {cap}: f({f.a}) in {_enc(pa, e)}, "
        f"f({f.b}) in {_enc(pb, e)}"
    )


def _enc(v: Fraction, e: int) -> str:
    r = pow2(-e)
    return f"[{fraction_str(v - r)}, {fraction_str(v + r)}]"


# -- grid searches -------------------------------------------------------------------


class Grid:
    """The rank-n grid of a rescaled function, with cached psi values."""

    def __init__(self, g: Rescaled, n: int):
        self.g = g
        self.n = n
        self.N = g.grid_size(n)
        self.perr = pow2(-n)
        self.evals = 0
        self._cache: dict[int, Fraction] = {}
        self.can_bound = g.f.enclose is not None

    def point(self, k: int) -> Fraction:
        return Fraction(k, self.N)

    def psi(self, k: int) -> Fraction:
        v = self._cache.get(k)
        if v is None:
            v = self.g.psi(self.point(k), self.n)
            self._cache[k] = v
            self.evals += 1
        return v

    def bounds(self, lo: int, hi: int) -> Interval | None:
        return self.g.enclose(self.point(lo), self.point(hi))

    def _require_scan(self):
        if self.N > LINEAR_SCAN_LIMIT:
            raise UnverifiableError(
                f"grid of {self.N + 1} points needs an enclosure for the function"
            )

    def leftmost_at_least(self, thresh: Fraction) -> int | None:
        """min {k : psi(k) >= thresh}."""
        if not self.can_bound:
            self._require_scan()
            return next((k for k in range(self.N + 1) if self.psi(k) >= thresh), None)
        stack = [(0, self.N)]
        while stack:
            lo, hi = stack.pop()
            if hi - lo < _LEAF:
                for k in range(lo, hi + 1):
                    if self.psi(k) >= thresh:
                        return k
                continue
            r = self.bounds(lo, hi)
            if r.hi < thresh - self.perr:
                continue
            mid = (lo + hi) // 2
            stack.append((mid + 1, hi))
            stack.append((lo, mid))
        return None

    def rightmost_at_most(self, thresh: Fraction) -> int | None:
        """max {k : psi(k) <= thresh}."""
        if not self.can_bound:
            self._require_scan()
            return next((k for k in range(self.N, -1, -1) if self.psi(k) <= thresh), None)
        stack = [(0, self.N)]
        while stack:
            lo, hi = stack.pop()
            if hi - lo < _LEAF:
                for k in range(hi, lo - 1, -1):
                    if self.psi(k) <= thresh:
                        return k
                continue
            r = self.bounds(lo, hi)
            if r.lo > thresh + self.perr:
                continue
            mid = (lo + hi) // 2
            stack.append((lo, mid))
            stack.append((mid + 1, hi))
        return None

    def maximum(self) -> Fraction:
        """max_k psi(k)."""
        if not self.can_bound:
            self._require_scan()
            return max(self.psi(k) for k in range(self.N + 1))
        best = max(self.psi(0), self.psi(self.N))
        heap = [(-self.bounds(0, self.N).hi, 0, self.N)]
        while heap:
            neg_hi, lo, hi = heapq.heappop(heap)
            if -neg_hi + self.perr < best:
                break
            if hi - lo < _LEAF:
                best = max(best, max(self.psi(k) for k in range(lo, hi + 1)))
                continue
            mid = (lo + hi) // 2
            for a, b in ((lo, mid), (mid + 1, hi)):
                r = self.bounds(a, b)
                if r.hi + self.perr >= best:
                    heapq.heappush(heap, (-r.hi, a, b))
        return best


# -- results -------------------------------------------------------------------------


@dataclass(frozen=True)
class RankRecord:
    n: int
    N: int
    k: int
    point: Fraction
    psi_value: Fraction

    def to_json(self) -> dict:
        return {"n": self.n, "N_n": self.N, "k_minus": self.k,
                "point": fraction_str(self.point), "psi_value": fraction_str(self.psi_value)}


@dataclass(eq=False)
class GridResult:
    """A grid point sequence and the one-sided real it defines.

    ``point_seq`` holds the grid points in the original domain; the real is
    its running sup (LeftComputable) or running inf (RightComputable).
    """

    point_seq: CheapNumber
    side: str
    records: dict[int, RankRecord] = field(default_factory=dict)

    @property
    def ranks_evaluated(self) -> int:
        return len(self.records)

    def running(self) -> CheapNumber:
        if self.side == LEFT_COMPUTABLE:
            return running_sup(self.point_seq)
        return running_inf(self.point_seq)

    def one_sided(self) -> OneSidedReal:
        return OneSidedReal(LEFT if self.side == LEFT_COMPUTABLE else RIGHT, self.point_seq)

    def estimate(self, n: int) -> Fraction:
        return Fraction(self.point_seq.at(n))

    def value_enclosure(self) -> tuple[Fraction, Fraction] | None:
        if not self.records:
            return None
        r = self.records[max(self.records)]
        e = pow2(-r.n)
        return r.psi_value - e, r.psi_value + e

    def to_json(self) -> dict:
        enc = self.value_enclosure()
        return {
            "side": self.side,
            "ranks_evaluated": self.ranks_evaluated,
            "records": [self.records[n].to_json() for n in sorted(self.records)],
            "value_enclosure": None if enc is None else [fraction_str(v) for v in enc],
        }


def _grid_sequence(g: Rescaled, pick, side: str, label: str) -> GridResult:
    result = GridResult(None, side)  # type: ignore[arg-type]

    def component(n):
        grid = Grid(g, n)
        k = pick(grid)
        t = grid.point(k)
        x = g.to_x(t)
        result.records[n] = RankRecord(n, grid.N, k, x, g.sign * grid.psi(k))
        return x

    result.point_seq = from_function(component, label)
    return result


def ivt_zero(f: CFunc, evaluate_to: int | None = None) -> tuple[GridResult, GridResult]:
    """Both one-sided zeros of f, given a certified sign change on [a, b].

    First result: k_n = min {k : psi(k/N, n) >= -eps_n}, whose running sup
    is a left-computable zero.  Second: max {k : psi(k/N, n) <= eps_n},
    whose running inf is a right-computable zero.
    """
    _, s = sign_evidence(f)
    g = Rescaled(f, s)

    def low(grid):
        k = grid.leftmost_at_least(-grid.perr)
        if k is None:
            raise SignConditionError(f"S+ is empty at rank {grid.n}")
        return k

    def high(grid):
        k = grid.rightmost_at_most(grid.perr)
        if k is None:
            raise SignConditionError(f"S- is empty at rank {grid.n}")
        return k

    lo = _grid_sequence(g, low, LEFT_COMPUTABLE, f"ivt-min({f})")
    hi = _grid_sequence(g, high, RIGHT_COMPUTABLE, f"ivt-max({f})")
    if evaluate_to is not None:
        lo.point_seq.prefix(evaluate_to + 1)
        hi.point_seq.prefix(evaluate_to + 1)
    return lo, hi


def evt_max(f: CFunc, evaluate_to: int | None = None,
            mirrored: bool = False) -> tuple[GridResult, CReal]:
    """Maximiser sequence and maximum value of f on its domain.

    At rank n the candidate set is {k : psi(k/N, n) >= M_n - 2 eps_n} with
    M_n the grid maximum; the least candidate (or the greatest, when
    ``mirrored``) gives the point.  The value approximation at n rounds
    M_{n+2} to 2^-(n+1).
    """
    g = Rescaled(f, 1)

    def pick(grid):
        m = grid.maximum()
        if mirrored:
            return _rightmost_ge(grid, m - 2 * grid.perr)
        return grid.leftmost_at_least(m - 2 * grid.perr)

    side = RIGHT_COMPUTABLE if mirrored else LEFT_COMPUTABLE
    result = _grid_sequence(g, pick, side, f"evt({f})")
    if evaluate_to is not None:
        result.point_seq.prefix(evaluate_to + 1)

    def approx(n):
        return round_at(Grid(g, n + 2).maximum(), n + 1)

    return result, CReal(approx, f"max({f})")


def _rightmost_ge(grid: Grid, thresh: Fraction) -> int:
    """max {k : psi(k) >= thresh}, via the mirrored function."""
    mirror = Grid(Rescaled(grid.g.f, -grid.g.sign), grid.n)
    # psi_mirror(k) = -psi(k); psi(k) >= thresh  <=>  psi_mirror(k) <= -thresh
    k = mirror.rightmost_at_most(-thresh)
    assert k is not None
    return k


# -- isolated zeros ------------------------------------------------------------------


def _sign(f: CFunc, t: Fraction, start: int, stop: int) -> int:
    """+1 or -1 if psi separates f(t) from 0 at some precision in [start, stop]."""
    p = start
    while p <= stop:
        v = f.psi_fraction(t, p)
        if v > pow2(-p):
            return 1
        if v < -pow2(-p):
            return -1
        p += 8
    return 0


def refine_isolated_zero(f: CFunc, bracket=None, n: int = 20,
                         extra_precision: int = 64) -> Dyadic:
    """A dyadic within 2^-n of the only zero of f in [c, d].

    Bisection with signs decided by psi at increasing precision; when the
    midpoint is undecidable (e.g. it is the zero) nearby probes are tried.
    """
    c, d = (Fraction(v) for v in (bracket or f.domain))
    top = n + extra_precision
    sc, sd = _sign(f, c, n, top), _sign(f, d, n, top)
    if sc == 0 or sd == 0 or sc == sd:
        raise SignConditionError(
            f"no certified sign change on [{c}, {d}] (signs {sc}, {sd} up to precision {top})"
        )
    lo, hi = c, d
    target = pow2(-(n + 1))
    while hi - lo > target:
        w = hi - lo
        mid = (lo + hi) / 2
        for t in (mid, mid + w / 8, mid - w / 8, mid + w / 4, mid - w / 4):
            s = _sign(f, t, n + 2, top)
            if s:
                if s == sc:
                    lo = t
                else:
                    hi = t
                break
        else:
            raise StuckIntervalError(lo, hi, top)
    return round_at((lo + hi) / 2, n)


# -- standard-part estimates ---------------------------------------------------------


def st_estimates(x: CheapNumber, budget: int = 1000) -> tuple[Fraction, Fraction]:
    """(min, max) over the trailing half window, estimating (st-, st+)."""
    c = classify(x, budget)
    if c.kind not in (LIMITED, INFINITESIMAL):
        raise UnverifiableError(f"{x} is not confirmed limited within budget {budget}")
    vals = [Fraction(x.at(n)) for n in range(budget // 2, budget + 1)]
    return min(vals), max(vals)


__all__ = [
    "LEFT_COMPUTABLE", "RIGHT_COMPUTABLE", "Rescaled", "Grid", "RankRecord", "GridResult",
    "sign_evidence", "ivt_zero", "evt_max", "refine_isolated_zero", "st_estimates",
    "running_inf", "running_sup",
]
