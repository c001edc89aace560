"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class CheapRealError(Exception):
    """Base class for all errors raised by cheapreal."""


class SortError(CheapRealError, TypeError):
    """A value of the wrong sort (e.g. a non-natural shift index)."""


class TotalityError(CheapRealError, ArithmeticError):
    """A generator turned out to be partial at some rank."""

    def __init__(self, message: str, rank: int | None = None):
        super().__init__(message)
        self.rank = rank


class MuCapExceeded(CheapRealError, RuntimeError):
    """A bounded minimisation ran out of iterations."""

    def __init__(self, rank: int, cap: int, what: str = "mu-search"):
        super().__init__(
            f"{what} exceeded {cap} iterations at rank {rank} "
            "(predicate not safe, or cap too small)"
        )
        self.rank = rank
        self.cap = cap


class UnverifiableError(CheapRealError):
    """A budgeted precondition could not be confirmed."""


class NotSerializableError(CheapRealError):
    """The object contains an opaque generator with no canonical form."""


class RenormalizationError(CheapRealError):
    """No effectiveness witness is available to rescale an approximation."""


class DivisionError(CheapRealError, ZeroDivisionError):
    """Division by a real that is not certified away from zero."""


class DomainError(CheapRealError, ValueError):
    """A point (or enclosure) lies outside a function's domain."""


class CompositionRangeError(DomainError):
    """Inner range of a composition escapes the outer domain."""


class SignConditionError(CheapRealError, ValueError):
    """The endpoint sign condition of a root finder could not be certified."""


class StuckIntervalError(CheapRealError, RuntimeError):
    """Bisection could not decide a sign at maximum precision."""

    def __init__(self, lo, hi, precision: int):
        super().__init__(
            f"sign undecidable on [{lo}, {hi}] up to precision 2^-{precision}"
        )
        self.lo = lo
        self.hi = hi
        self.precision = precision


class ParseError(CheapRealError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class UnknownSuiteError(CheapRealError, KeyError):
    """An invariant suite name that is not registered."""

    def __str__(self):
        return self.args[0] if self.args else "unknown suite"
