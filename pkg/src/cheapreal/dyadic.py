"""Dyadic rationals m * 2^e and the exact rounding helpers used throughout."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


def _ge_pow2(a: int, b: int, k: int) -> bool:
    """Is 2^k * b >= a?  (a, b > 0)"""
    if k >= 0:
        return (b << k) >= a
    return b >= (a << -k)


def ceil_log2(q: Rational) -> int:
    """Smallest integer k with 2^k >= q, for q > 0."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError(f"ceil_log2 needs a positive argument, got {q}")
    a, b = q.numerator, q.denominator
    k = a.bit_length() - b.bit_length()
    while not _ge_pow2(a, b, k):
        k += 1
    while _ge_pow2(a, b, k - 1):
        k -= 1
    return k


def floor_log2(q: Rational) -> int:
    """Largest integer k with 2^k <= q, for q > 0."""
    k = ceil_log2(q)
    return k if pow2(k) == Fraction(q) else k - 1


def pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def round_half_even(q: Rational) -> int:
    # Fraction.__round__ already rounds ties to even
    return round(Fraction(q))


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True, order=False)
class Dyadic:
    """mantissa * 2**exponent, kept with an odd mantissa (or zero with exponent 0)."""

    mantissa: int
    exponent: int

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if m == 0:
            e = 0
        else:
            tz = (m & -m).bit_length() - 1
            if tz:
                m >>= tz
                e += tz
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_fraction(cls, q: Rational) -> Dyadic:
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, -(d.bit_length() - 1))

    @classmethod
    def nearest(cls, q: Rational, exponent: int) -> Dyadic:
        """Nearest multiple of 2**exponent, ties to even mantissa."""
        scaled = Fraction(q) / pow2(exponent)
        return cls(round_half_even(scaled), exponent)

    @classmethod
    def ceil(cls, q: Rational, exponent: int) -> Dyadic:
        scaled = Fraction(q) / pow2(exponent)
        return cls(ceil_div(scaled.numerator, scaled.denominator), exponent)

    def to_fraction(self) -> Fraction:
        return self.mantissa * pow2(self.exponent)

    def __add__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        e = min(self.exponent, other.exponent)
        return Dyadic(
            (self.mantissa << (self.exponent - e)) + (other.mantissa << (other.exponent - e)), e
        )

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __sub__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.exponent)

    def __lt__(self, other):
        return self.to_fraction() < _frac(other)

    def __le__(self, other):
        return self.to_fraction() <= _frac(other)

    def __gt__(self, other):
        return self.to_fraction() > _frac(other)

    def __ge__(self, other):
        return self.to_fraction() >= _frac(other)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __str__(self):
        return fraction_str(self.to_fraction())

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"


def _frac(x) -> Fraction:
    return x.to_fraction() if isinstance(x, Dyadic) else Fraction(x)


def fraction_str(q: Rational) -> str:
    """Render an exact rational as "p/q" (or "p" for integers)."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Fraction:
    """Inverse of :func:`fraction_str`; also accepts decimal notation."""
    return Fraction(text.strip())
