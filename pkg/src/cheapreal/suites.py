"""Named invariant suites, shared by the ``check`` command and the tests.

Each suite returns a :class:`SuiteReport`; ``passed`` is False as soon as one
check fails, and ``failures`` lists the offending cases.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import expr as E
from .cfunc import CFunc, check_continuity_at, check_uniform_continuity, synthesize
from .creal import (LEFT, RIGHT, OneSidedReal, add, div, find_nonzero_evidence,
                    from_cheap_pair, from_rational, join_sides, mul, mul_schedule, renormalize,
                    sqrt_rational, sub)
from .dyadic import Dyadic, fraction_str, pow2
from .errors import UnknownSuiteError
from .infinitesimal import (canonical_eps, certify_monotone, chain, effective_wrt,
                            feasible_stop,
                            harmonic, harmonic_witness, monotone_to_canonical,
                            validate_witness)
from .parse import parse_cheap, parse_function
from .seq import (CheapNumber, eventually_eq, eventually_leq, from_expr, from_function,
                  index_sum, lift, shift_binary, shift_unary)
from .solver import evt_max, ivt_zero, refine_isolated_zero


@dataclass
class SuiteReport:
    name: str
    checks: int = 0
    failures: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, ok: bool, **detail):
        self.checks += 1
        if not ok:
            self.failures.append(detail)

    def to_json(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": self.checks,
                "failures": self.failures[:50], "failure_count": len(self.failures),
                "notes": self.notes, "seconds": round(self.seconds, 3)}


# -- corpora ------------------------------------------------------------------------

MONOTONE_CORPUS = [
    "2^-omega",
    "1/(omega+1)",
    "1/(omega^2+1)",
    "3/(omega+1)",
    "1/(omega//2+1)",
]

TARGET_CORPUS = ["2^-omega", "1/(omega^2+1)", "1/(omega+1)"]

# largest chained index at which a witness is still validated exactly
INDEX_LIMIT = 1 << 20

IVT_CORPUS = [
    "x^2 - 2 on [1, 2]",
    "x^3 - x - 1/4 on [1, 2]",
    "x^3 - x - 1/4 on [-1/2, 0]",
]


def random_rational(rng: random.Random, bound: int = 1 << 10, den: int = 1 << 12) -> Fraction:
    return Fraction(rng.randint(-bound * den, bound * den), rng.randint(1, den))


def random_index(rng: random.Random) -> E.Expr:
    """A random Nat-valued expression (a cheap index)."""
    w = E.Rank()
    choice = rng.randrange(6)
    if choice == 0:
        return E.Const(rng.randint(0, 5))
    if choice == 1:
        return w
    if choice == 2:
        return E.Binary("idiv", w, E.Const(rng.randint(1, 4)))
    if choice == 3:
        return E.Binary("monus", w, E.Const(rng.randint(0, 10)))
    if choice == 4:
        return E.Binary("min", w, E.Const(rng.randint(0, 20)))
    return E.Binary("add", w, E.Const(rng.randint(0, 3)))


def random_expr(rng: random.Random, depth: int = 3) -> E.Expr:
    """A random serialisable cheap rational of moderate growth."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return E.Rank()
        return E.Const(Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
    kind = rng.randrange(8)
    a = random_expr(rng, depth - 1)
    if kind < 3:
        op = ("add", "sub", "mul")[kind]
        return E.Binary(op, a, random_expr(rng, depth - 1))
    if kind == 3:
        return E.Binary(rng.choice(["min", "max"]), a, random_expr(rng, depth - 1))
    if kind == 4:
        return E.Unary(rng.choice(["floor", "ceil", "abs"]), a)
    if kind == 5:
        return E.Shift(a, random_index(rng))
    if kind == 6:
        den = E.Binary("add", E.Binary("mul", E.Rank(), E.Rank()), E.Const(1))
        return E.Binary("div", a, den)
    return E.Select(E.Cmp("<", E.Binary("idiv", E.Rank(), E.Const(2)),
                          E.Const(rng.randint(0, 30))), a, random_expr(rng, depth - 1))


# -- suites ---------------------------------------------------------------------------


def shift_laws(count: int = 200, ranks: int = 1001, seed: int = 1) -> SuiteReport:
    """x^{+0} = x, x^{+1} = x⁺, composition of shifts and c⁺ = c, exactly."""
    rep = SuiteReport("shift-laws")
    rng = random.Random(seed)
    for i in range(count):
        x = from_expr(random_expr(rng))
        y = from_expr(random_index(rng))
        z = from_expr(random_index(rng))
        k = lift(rng.randint(0, 5))
        c = lift(Fraction(rng.randint(-50, 50), rng.randint(1, 7)))
        s0, s1, xp = shift_binary(x, lift(0)), shift_binary(x, lift(1)), shift_unary(x)
        composed = shift_binary(shift_binary(x, y), z)
        via_sum = shift_binary(x, index_sum(y, z))
        standard = shift_binary(x, k + z)
        standard_step = shift_binary(shift_binary(x, k), z)
        cp = shift_unary(c)
        laws = (("x^{+0}=x", s0, x), ("x^{+1}=x+", s1, xp),
                ("(x^{+y})^{+z}", composed, via_sum),
                ("x^{+(k+z)}=(x^{+k})^{+z}", standard, standard_step), ("c+=c", cp, c))
        for law, lhs, rhs in laws:
            a, b = lhs.prefix(ranks), rhs.prefix(ranks)
            bad = [n for n in range(ranks) if a[n] != b[n]]
            rep.checks += ranks - 1
            rep.record(not bad, case=i, law=law, ranks=bad[:5])
    return rep


def witnesses(upto: int = 10**4, chain_upto: int = 512) -> SuiteReport:
    """compEpsilon and monotone witnesses, and chains through 1/(omega+1)."""
    rep = SuiteReport("witnesses")
    h = harmonic().value
    for t in TARGET_CORPUS:
        y = parse_cheap(t)
        w = harmonic_witness(y)
        bad = validate_witness(h, y, w, upto)
        rep.record(bad is None, construction="compEpsilon", target=t, rank=bad)
    for s in MONOTONE_CORPUS:
        eps = certify_monotone(parse_cheap(s))
        rep.record(eps is not None, construction="certify", eps=s)
        if eps is None:
            continue
        w = monotone_to_canonical(eps)
        bad = validate_witness(eps.value, h, w, upto)
        rep.record(bad is None, construction="monotone", eps=s, rank=bad)
    pairs = 0
    limits = {}
    for s in MONOTONE_CORPUS:
        for t in MONOTONE_CORPUS:
            eps, y = parse_cheap(s), parse_cheap(t)
            w1 = monotone_to_canonical(certify_monotone(eps))
            w2 = harmonic_witness(y)
            w = chain(w1, w2)
            # exact validation needs eps at rank ~w2_n; stop before that outgrows memory
            stop = feasible_stop(w2, chain_upto, INDEX_LIMIT)
            bad = validate_witness(eps, y, w, stop)
            rep.record(bad is None, construction="chained", eps=s, target=t, rank=bad,
                       validated_upto=stop)
            limits[f"{s} -> {t}"] = stop
            found = effective_wrt(eps, y)
            rep.record(found is not None, construction="effective_wrt", eps=s, target=t)
            pairs += 1
    rep.notes = {"validated_upto": upto, "chain_validated_upto": chain_upto,
                 "chained_pairs": pairs, "chain_limits": limits}
    return rep


def renormalization(count: int = 500, max_k: int = 20, seed: int = 3) -> SuiteReport:
    """|x - p'/nu| <= eps' exactly, for pq within eps of x."""
    rep = SuiteReport("renormalize")
    rng = random.Random(seed)
    corpus = [certify_monotone(parse_cheap(s)) for s in MONOTONE_CORPUS]
    for i in range(count):
        x = random_rational(rng)
        eps = corpus[i % len(corpus)]
        sign = 1 if rng.random() < 0.5 else -1
        # a cheap rational that wobbles around x inside the eps-band
        pq = from_function(lambda n, x=x, e=eps.value, s=sign: x + s * (-1) ** n * e.at(n) / 2,
                           label=f"wobble({x})")
        for k in range(max_k + 1):
            target = pow2(-k)
            p, nu = renormalize(pq, eps, target)
            err = abs(x - Fraction(p, nu))
            rep.record(err <= target, x=fraction_str(x), k=k, p=p, nu=nu,
                       error=fraction_str(err))
    return rep


def rice(count: int = 1000, n: int = 20, seed: int = 4) -> SuiteReport:
    """add/sub/mul/div of exact rationals within 2^-n; mul schedule bound."""
    rep = SuiteReport("rice-mul")
    rng = random.Random(seed)
    tol = pow2(-n)
    for i in range(count):
        a, b = random_rational(rng), random_rational(rng)
        x, y = from_rational(a), from_rational(b)
        for op, r, exact in (("add", add(x, y), a + b), ("sub", sub(x, y), a - b),
                             ("mul", mul(x, y), a * b)):
            err = abs(r.approx_fraction(n) - exact)
            rep.record(err <= tol, op=op, x=fraction_str(a), y=fraction_str(b))
        s = mul_schedule(x, y, n)
        p = s.operand_precision
        actual = abs(x.approx_fraction(p) * y.approx_fraction(p) - a * b)
        rep.record(actual <= s.product_error() <= pow2(-(n + 2)), op="schedule",
                   x=fraction_str(a), y=fraction_str(b))
        if b != 0:
            e = find_nonzero_evidence(y)
            err = abs(div(x, y, e).approx_fraction(n) - a / b)
            rep.record(err <= tol, op="div", x=fraction_str(a), y=fraction_str(b))
    return rep


def join(count: int = 50, n: int = 20, seed: int = 5) -> SuiteReport:
    """Brackets around random rationals rejoin within 2^-n."""
    rep = SuiteReport("join")
    rng = random.Random(seed)
    for _ in range(count):
        q = random_rational(rng, 16)
        lo = from_function(lambda m, q=q: q - pow2(-m) * (1 + m % 3), "lo")
        hi = from_function(lambda m, q=q: q + pow2(-m) * (1 + (m + 1) % 2), "hi")
        r = join_sides(OneSidedReal(LEFT, lo), OneSidedReal(RIGHT, hi))
        err = abs(r.approx_fraction(n) - q)
        rep.record(err <= pow2(-n), q=fraction_str(q), error=fraction_str(err))
    return rep


def real_corpus():
    s2 = sqrt_rational(2)
    third = from_rational(Fraction(1, 3))
    return {
        "1/3": third,
        "sqrt(2)": s2,
        "sqrt(2)*sqrt(2)": mul(s2, s2),
        "sqrt(2)+1/3": add(s2, third),
        "1/sqrt(2)": div(from_rational(1), s2, 2),
        "pair(2^-omega wobble)": from_cheap_pair(
            from_function(lambda k: Fraction(2, 7) + Fraction((-1) ** k, 2 ** (k + 1)), "w"),
            canonical_eps()),
    }


def fast_cauchy(top: int = 24) -> SuiteReport:
    rep = SuiteReport("fast-cauchy")
    for name, x in real_corpus().items():
        for n in range(top):
            for m in range(n + 1, top + 1):
                d = abs(x.approx_fraction(n) - x.approx_fraction(m))
                rep.record(d <= pow2(-n) + pow2(-m), real=name, n=n, m=m)
    return rep


def _bisect_root(f: Callable[[Fraction], Fraction], a: Fraction, b: Fraction,
                 steps: int = 64) -> Fraction:
    fa = f(a)
    for _ in range(steps):
        mid = (a + b) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return (a + b) / 2


def ivt(count: int = 20, n: int = 20, seed: int = 6) -> SuiteReport:
    rep = SuiteReport("ivt")
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        q = Fraction(rng.randint(1, 999), 1000)
        cases.append((f"x - {q.numerator}/{q.denominator} on [0, 1]", q))
    for s in IVT_CORPUS:
        e, dom = parse_function(s)
        cases.append((s, _bisect_root(lambda t, e=e: e.exact(t), *dom)))
    timings = {}
    for text, root in cases:
        start = time.perf_counter()
        e, dom = parse_function(text)
        f = synthesize(e, dom)
        lo, hi = ivt_zero(f)
        z = refine_isolated_zero(f, None, n)
        a, b = lo.estimate(n), hi.estimate(n)
        tol = pow2(-16)
        rep.record(abs(a - root) <= tol, case=text, side="low", point=str(a))
        rep.record(abs(b - root) <= tol, case=text, side="high", point=str(b))
        rep.record(abs(z.to_fraction() - root) <= pow2(-n) + pow2(-60), case=text,
                   side="refined", point=str(z))
        timings[text] = round(time.perf_counter() - start, 3)
        rep.record(timings[text] < 5, case=text, timing=timings[text])
    rep.notes = {"seconds_per_root": timings}
    return rep


def evt(samples: int = 100, seed: int = 7) -> SuiteReport:
    rep = SuiteReport("evt")
    rng = random.Random(seed)
    e, dom = parse_function("x*(1 - x) on [0, 1]")
    f = synthesize(e, dom)
    point, value = evt_max(f)
    v16 = value.approx_fraction(16)
    rep.record(abs(v16 - Fraction(1, 4)) <= pow2(-14), check="max value at rank 16",
               value=fraction_str(v16))
    p16 = point.estimate(16)
    tol = Fraction(1, point.records[16].N) + pow2(-7)
    rep.record(abs(p16 - Fraction(1, 2)) <= tol, check="maximiser at rank 16",
               point=fraction_str(p16))
    top = value.approx_fraction(20)
    for _ in range(samples):
        q = Fraction(rng.randint(0, 10**6), 10**6)
        rep.record(f.psi_fraction(q, 20) <= top + pow2(-16), check="dominance",
                   q=fraction_str(q))
    return rep


def step_function() -> CFunc:
    """Indicator of [1/2, 1] on [0, 1]; discontinuous at 1/2."""
    return CFunc((0, 1), lambda d, n: Dyadic(0, 0) if d < Fraction(1, 2) else Dyadic(1, 0),
                 lambda n: n, label="step")


def square_on_growing_domain() -> tuple[CFunc, Callable]:
    """x^2 with psi on all rationals, and the pairs (x_n, x_n + 1/x_n), x_n = n + 1."""
    def psi(d, n):
        return Dyadic.nearest(Fraction(d) ** 2, -(n + 1))

    f = CFunc((0, 1 << 40), psi, lambda n: n, label="x^2 (unbounded)")

    def scheme(n):
        x = Fraction(n + 1)
        return [(x, x + 1 / x)]

    return f, scheme


CONTINUOUS_CORPUS = ["x^2 on [0, 1]", "x^3 - x on [0, 1]", "1/3 on [0, 1]",
                     "2*x - 1 on [0, 1]"]


def continuity(budget: int = 1000) -> SuiteReport:
    rep = SuiteReport("continuity")
    verdicts = {}
    for s in CONTINUOUS_CORPUS:
        e, dom = parse_function(s)
        f = synthesize(e, dom)
        u = check_uniform_continuity(f, budget)
        c = check_continuity_at(f, from_rational(Fraction(1, 2)), budget)
        verdicts[s] = (str(u), str(c))
        rep.record(not u.is_false and not c.is_false, case=s, verdict="no False allowed")
        if s in ("x^2 on [0, 1]", "x^3 - x on [0, 1]"):
            rep.record(u.is_true and c.is_true, case=s, uniform=str(u), pointwise=str(c))
    t = check_continuity_at(step_function(), from_rational(Fraction(1, 2)), budget)
    verdicts["step at 1/2"] = str(t)
    rep.record(t.is_false, case="step function at its jump", verdict=str(t))
    f, scheme = square_on_growing_domain()
    t = check_uniform_continuity(f, budget, scheme)
    verdicts["(x + 1/x)^2 scheme"] = str(t)
    rep.record(t.is_false, case="(x+1/x)^2 pairs", verdict=str(t))
    rep.notes = {"verdicts": verdicts}
    return rep


# oscillating sequences given by their even and odd branches as functions of n
OSCILLATING = {
    "(-1)^n": ("1", "-1"),
    "1 + (-1)^n/(n+1)": ("1 + 1/(n+1)", "1 - 1/(n+1)"),
    "(-1)^n * n": ("n", "-n"),
    "1/(n+1)": ("1/(n+1)", "1/(n+1)"),
    "0": ("0", "0"),
    "1": ("1", "1"),
    "-1": ("-1", "-1"),
    "n mod 2": ("0", "1"),
    "(1 + (-1)^n)/2": ("1", "0"),
    "2 - 1/(n+1)": ("2 - 1/(n+1)", "2 - 1/(n+1)"),
}


def _branch_value(src: str, n: int) -> Fraction:
    return Fraction(eval(src, {"__builtins__": {}}, {"n": Fraction(n)}))  # noqa: S307


def oscillating_number(name: str) -> CheapNumber:
    even, odd = OSCILLATING[name]
    return from_function(lambda n: _branch_value(even if n % 2 == 0 else odd, n), name)


def eventual_sign(diff_even: str, diff_odd: str) -> list[int]:
    """Eventual signs (-1, 0, 1) of both parity branches, decided with sympy."""
    import sympy

    k = sympy.Symbol("k", integer=True, nonnegative=True)
    out = []
    for src, sub_n in ((diff_even, 2 * k), (diff_odd, 2 * k + 1)):
        expr = sympy.sympify(src, locals={"n": sympy.Symbol("n")}).subs("n", sub_n)
        expr = sympy.together(sympy.simplify(expr))
        if expr == 0:
            out.append(0)
            continue
        num, den = sympy.fraction(expr)
        lead = sympy.Poly(num, k).LC() / sympy.Poly(den, k).LC()
        out.append(1 if lead > 0 else -1)
    return out


def ground_truth(x: str, y: str, relation: str) -> bool:
    """Does ``x relation y`` hold for all sufficiently large n?"""
    xe, xo = OSCILLATING[x]
    ye, yo = OSCILLATING[y]
    signs = eventual_sign(f"({xe}) - ({ye})", f"({xo}) - ({yo})")
    if relation == "eq":
        return all(s == 0 for s in signs)
    return all(s <= 0 for s in signs)


def trilean_honesty(budget: int = 100) -> SuiteReport:
    rep = SuiteReport("trilean")
    names = list(OSCILLATING)
    nums = {s: oscillating_number(s) for s in names}
    counts = {"TRUE": 0, "FALSE": 0, "UNKNOWN": 0}
    for a in names:
        for b in names:
            for rel, fn in (("eq", eventually_eq), ("leq", eventually_leq)):
                t = fn(nums[a], nums[b], budget)
                counts[str(t)] += 1
                if t.is_unknown:
                    continue
                truth = ground_truth(a, b, rel)
                rep.record(t.is_true == truth, x=a, y=b, relation=rel, verdict=str(t),
                           truth=truth)
    total = sum(counts.values())
    rep.notes = {"verdicts": counts, "unknown_rate": round(counts["UNKNOWN"] / total, 4)}
    return rep


SUITES: dict[str, Callable[[], SuiteReport]] = {
    "shift-laws": shift_laws,
    "witnesses": witnesses,
    "renormalize": renormalization,
    "rice-mul": rice,
    "join": join,
    "fast-cauchy": fast_cauchy,
    "ivt": ivt,
    "evt": evt,
    "continuity": continuity,
    "trilean": trilean_honesty,
}


def run_suite(name: str) -> SuiteReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise UnknownSuiteError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}"
        ) from None
    start = time.perf_counter()
    rep = fn()
    rep.seconds = time.perf_counter() - start
    return rep
