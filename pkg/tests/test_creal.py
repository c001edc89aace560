from fractions import Fraction
from math import isqrt

import pytest
from hypothesis import given, settings, strategies as st

from cheapreal.creal import (LEFT, RIGHT, OneSidedReal, add, bracket_closing_rank, digits,
                             div, find_nonzero_evidence, from_cheap_pair, from_json,
                             from_rational, join_sides, mul, mul_schedule, neg, renormalize,
                             sqrt_rational, sub, to_cheap)
from cheapreal.dyadic import Dyadic, pow2
from cheapreal.errors import DivisionError, RenormalizationError
from cheapreal.infinitesimal import canonical_eps, certify_monotone, harmonic
from cheapreal.parse import parse_cheap
from cheapreal.seq import from_function, lift


def sqrt2_floor(n: int) -> Fraction:
    """floor(sqrt(2) * 2^n) / 2^n: exact integer oracle."""
    return Fraction(isqrt(2 * 4**n), 2**n)


def near_sqrt2(q: Fraction, n: int, tol: Fraction) -> bool:
    # sqrt(2) lies in [lo, lo + 2^-n]; q within tol of every point there
    lo = sqrt2_floor(n)
    return q - tol <= lo and lo + pow2(-n) <= q + tol


rationals = st.fractions(min_value=-1024, max_value=1024, max_denominator=1 << 12)


def test_from_rational_examples():
    assert from_rational(Fraction(1, 3)).approx_fraction(2) == Fraction(1, 4)
    assert all(from_rational(5).approx_fraction(n) == 5 for n in range(30))
    assert from_rational(Fraction(-7, 8)).approx_fraction(3) == Fraction(-7, 8)


def test_rounding_ties_to_even():
    assert from_rational(Fraction(3, 8)).approx_fraction(2) == Fraction(1, 2)
    assert from_rational(Fraction(1, 8)).approx_fraction(2) == 0
    assert from_rational(Fraction(-3, 8)).approx_fraction(2) == Fraction(-1, 2)
    assert Dyadic.nearest(Fraction(5, 2), 0) == Dyadic(2, 0)


@settings(max_examples=200, deadline=None)
@given(q=rationals, n=st.integers(0, 40))
def test_from_rational_error(q, n):
    assert abs(from_rational(q).approx_fraction(n) - q) <= pow2(-(n + 1))


def test_renormalize_example():
    p, nu = renormalize(lift(Fraction(1, 3)), canonical_eps(), Fraction(1, 8))
    assert (p, nu) == (6, 16)
    assert abs(Fraction(1, 3) - Fraction(p, nu)) == Fraction(1, 24)


def test_cheap_pair_zero():
    z = from_cheap_pair(lift(0))
    assert all(z.approx_fraction(n) == 0 for n in range(20))


def newton_sqrt2(k: int) -> Fraction:
    """Newton iterates from 2, rounded to 2^-(k+3); within 2^-k of sqrt 2."""
    x = Fraction(2)
    for _ in range(2 + max(k + 2, 1).bit_length()):
        x = Dyadic.nearest((x + 2 / x) / 2, -(k + 3)).to_fraction()
    return x


def test_cheap_pair_from_newton_iterates():
    pq = from_function(newton_sqrt2, "newton")
    for k in range(200):
        assert near_sqrt2(newton_sqrt2(k), k + 8, pow2(-k))
    r = from_cheap_pair(pq, canonical_eps())
    assert near_sqrt2(r.approx_fraction(20), 40, pow2(-20))


def test_cheap_pair_needs_effective_eps():
    with pytest.raises(RenormalizationError):
        from_cheap_pair(lift(0), parse_cheap("(2 + (-1)^omega)/(omega+1)"))


def test_cheap_pair_with_harmonic_eps():
    x = Fraction(5, 7)
    pq = from_function(lambda n: x + Fraction((-1) ** n, n + 1), "harmonic wobble")
    r = from_cheap_pair(pq, harmonic())
    for n in range(12):
        assert abs(r.approx_fraction(n) - x) <= pow2(-n)


def test_join_examples():
    phi = from_function(lambda m: 1 - Fraction(1, m) if m else Fraction(0), "1-1/m")
    phi2 = from_function(lambda m: 1 + Fraction(1, m) if m else Fraction(2), "1+1/m")
    left, right = OneSidedReal(LEFT, phi), OneSidedReal(RIGHT, phi2)
    assert bracket_closing_rank(left, right, Fraction(1, 4)) == 8
    assert phi.at(8) == Fraction(7, 8)
    r = join_sides(left, right)
    for n in range(6):
        assert abs(r.approx_fraction(n) - 1) <= pow2(-n)
    half = join_sides(OneSidedReal(LEFT, lift(Fraction(1, 2))),
                      OneSidedReal(RIGHT, lift(Fraction(1, 2))))
    assert all(half.approx_fraction(n) == Fraction(1, 2) for n in range(1, 20))


def test_join_bisection_brackets_of_sqrt2():
    def bisect(m):
        a, b = Fraction(1), Fraction(2)
        for _ in range(m):
            c = (a + b) / 2
            a, b = (c, b) if c * c < 2 else (a, c)
        return a, b

    lo = from_function(lambda m: bisect(m)[0], "lo")
    hi = from_function(lambda m: bisect(m)[1], "hi")
    r = join_sides(OneSidedReal(LEFT, lo), OneSidedReal(RIGHT, hi))
    assert near_sqrt2(r.approx_fraction(20), 40, pow2(-20))


@settings(max_examples=50, deadline=None)
@given(q=st.fractions(min_value=-16, max_value=16, max_denominator=1000),
       a=st.integers(1, 3), b=st.integers(1, 3))
def test_join_reproduces_rationals(q, a, b):
    lo = from_function(lambda m: q - a * pow2(-m), "lo")
    hi = from_function(lambda m: q + b * pow2(-m), "hi")
    r = join_sides(OneSidedReal(LEFT, lo), OneSidedReal(RIGHT, hi))
    assert abs(r.approx_fraction(20) - q) <= pow2(-20)


def test_join_sides_checks_sides():
    x = OneSidedReal(LEFT, lift(0))
    with pytest.raises(ValueError):
        join_sides(x, x)


def test_one_sided_bound_check():
    s = OneSidedReal(LEFT, parse_cheap("omega"))
    assert s.check_bounded(10) == 11
    assert OneSidedReal(RIGHT, parse_cheap("1/(omega+1)")).check_bounded(1) is None


def test_arithmetic_examples():
    third, two_thirds = from_rational(Fraction(1, 3)), from_rational(Fraction(2, 3))
    assert abs(add(third, two_thirds).approx_fraction(10) - 1) <= pow2(-10)
    s2 = sqrt_rational(2)
    assert abs(sub(s2, s2).approx_fraction(20)) <= pow2(-20)
    assert abs(add(s2, neg(s2)).approx_fraction(20)) <= pow2(-20)
    x = from_rational(Fraction(3, 2))
    assert abs(mul(x, x).approx_fraction(20) - Fraction(9, 4)) <= pow2(-20)
    assert abs(mul(s2, from_rational(0)).approx_fraction(20)) <= pow2(-20)
    assert abs(mul(s2, s2).approx_fraction(20) - 2) <= pow2(-19)
    assert abs(div(from_rational(1), from_rational(3), 3).approx_fraction(10)
               - Fraction(1, 3)) <= pow2(-10)
    assert abs(div(s2, s2, 2).approx_fraction(16) - 1) <= pow2(-15)


def test_division_by_zero():
    for e in (0, 1, 5, 30):
        with pytest.raises(DivisionError):
            div(from_rational(1), from_rational(0), e)
    assert find_nonzero_evidence(from_rational(0)) is None


def test_division_evidence_precondition():
    # |approx(1)| of 1/3 is 1/2, not above 2^0
    with pytest.raises(DivisionError):
        div(from_rational(1), from_rational(Fraction(1, 3)), 1)


def test_to_cheap():
    seq, eps = to_cheap(from_rational(Fraction(1, 3)))
    for n in range(20):
        assert seq.at(n) == Dyadic.nearest(Fraction(1, 3), -n).to_fraction()
    assert eps.value.at(3) == Fraction(1, 8)
    zero, _ = to_cheap(from_rational(0))
    assert all(zero.at(n) == 0 for n in range(20))


def test_round_trip_through_cheap_pair():
    s2 = sqrt_rational(2)
    back = from_cheap_pair(*to_cheap(s2))
    for n in range(21):
        assert abs(s2.approx_fraction(n) - back.approx_fraction(n)) <= pow2(1 - n)


def test_digits():
    assert digits(from_rational(Fraction(1, 4)), 3) == "0.250 ± 0.001"
    assert digits(sqrt_rational(2), 5) == "1.41421 ± 0.00001"
    assert digits(from_rational(Fraction(-1, 3)), 2) == "-0.33 ± 0.01"
    with pytest.raises(ValueError):
        digits(from_rational(1), 0)


@settings(max_examples=60, deadline=None)
@given(q=rationals, k=st.integers(1, 12))
def test_digits_is_an_enclosure(q, k):
    text = digits(from_rational(q), k)
    mid, rad = text.split(" ± ")
    assert abs(Fraction(mid) - q) <= Fraction(rad)


def corpus():
    s2 = sqrt_rational(2)
    return [from_rational(Fraction(1, 3)), s2, mul(s2, s2), add(s2, from_rational(-1)),
            div(from_rational(1), s2, 2), sqrt_rational(Fraction(1, 7)),
            from_cheap_pair(from_function(newton_sqrt2, "newton"))]


@pytest.mark.parametrize("i", range(7))
def test_fast_cauchy(i):
    x = corpus()[i]
    for n in range(24):
        for m in range(n + 1, 25):
            assert abs(x.approx_fraction(n) - x.approx_fraction(m)) <= pow2(-n) + pow2(-m)


@settings(max_examples=40, deadline=None)
@given(a=rationals, b=rationals, c=rationals, n=st.integers(0, 24))
def test_field_laws(a, b, c, n):
    x, y, z = from_rational(a), sqrt_rational(abs(b)), from_rational(c)
    tol = pow2(2 - n)
    assert abs(sub(add(add(x, y), z), add(x, add(y, z))).approx_fraction(n)) <= tol
    assert abs(sub(add(x, y), add(y, x)).approx_fraction(n)) <= tol
    assert abs(sub(mul(x, y), mul(y, x)).approx_fraction(n)) <= tol
    lhs = mul(x, add(y, z))
    rhs = add(mul(x, y), mul(x, z))
    assert abs(sub(lhs, rhs).approx_fraction(n)) <= tol


@settings(max_examples=200, deadline=None)
@given(a=rationals, b=rationals, n=st.integers(0, 30))
def test_rice_operations(a, b, n):
    x, y = from_rational(a), from_rational(b)
    tol = pow2(-n)
    assert abs(add(x, y).approx_fraction(n) - (a + b)) <= tol
    assert abs(sub(x, y).approx_fraction(n) - (a - b)) <= tol
    assert abs(mul(x, y).approx_fraction(n) - a * b) <= tol
    s = mul_schedule(x, y, n)
    assert s.bound >= max(abs(a), abs(b))
    p = s.operand_precision
    assert abs(x.approx_fraction(p) * y.approx_fraction(p) - a * b) <= s.product_error()
    assert s.product_error() <= pow2(-(n + 2))
    if b != 0:
        e = find_nonzero_evidence(y)
        assert abs(div(x, y, e).approx_fraction(n) - a / b) <= tol


MONOTONE = ["2^-omega", "1/(omega+1)", "1/(omega^2+1)", "3/(omega+1)", "1/(omega//2+1)"]


@settings(max_examples=60, deadline=None)
@given(x=rationals, i=st.integers(0, 4), k=st.integers(0, 20), sign=st.sampled_from([1, -1]))
def test_renormalization_soundness(x, i, k, sign):
    eps = certify_monotone(parse_cheap(MONOTONE[i]))
    pq = from_function(lambda n: x + sign * eps.value.at(n), "edge")
    p, nu = renormalize(pq, eps, pow2(-k))
    assert abs(x - Fraction(p, nu)) <= pow2(-k)


def test_json_round_trip():
    s2 = sqrt_rational(2)
    r = add(mul(s2, from_rational(Fraction(1, 3))), neg(from_rational(5)))
    back = from_json(r.to_json())
    assert all(back.approx(n) == r.approx(n) for n in range(30))
