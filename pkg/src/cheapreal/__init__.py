"""Cheap non-standard numbers, effective infinitesimals and computable reals.

A cheap number is a total computable sequence of exact rationals, with every
predicate read as "for all sufficiently large rank".  Checks of eventual
properties run under a rank budget and return a :class:`Trilean`.
"""

from .creal import (CReal, OneSidedReal, add, digits, div, from_cheap_pair, from_rational,
                    join_sides, mul, neg, renormalize, sqrt_rational, sub, to_cheap)
from .cfunc import CFunc, check_continuity_at, check_modulus, check_uniform_continuity, \
    evaluate, synthesize
from .dyadic import Dyadic
from .errors import (CheapRealError, DivisionError, DomainError, MuCapExceeded, ParseError,
                     SignConditionError, SortError, TotalityError, UnverifiableError)
from .expr import Sort
from .infinitesimal import (EffectiveInfinitesimal, Witness, canonical_eps, certify_monotone,
                            chain, classify, effective_wrt, harmonic, is_effective,
                            monotone_to_canonical, validate_witness)
from .parse import parse_cheap, parse_expr, parse_function, parse_real
from .seq import (CheapNumber, compose, eventually_eq, eventually_leq, eventually_lt,
                  from_expr, from_function, index_sum, lift, map_total, omega, patch,
                  shift_binary, shift_unary)
from .solver import evt_max, ivt_zero, refine_isolated_zero
from .trilean import Trilean, Verdict

__version__ = "0.1.0"

__all__ = [
    "CReal", "OneSidedReal", "add", "digits", "div", "from_cheap_pair", "from_rational",
    "join_sides", "mul", "neg", "renormalize", "sqrt_rational", "sub", "to_cheap",
    "CFunc", "check_continuity_at", "check_modulus", "check_uniform_continuity",
    "evaluate", "synthesize", "Dyadic", "CheapRealError", "DivisionError",
    "DomainError", "MuCapExceeded", "ParseError", "SignConditionError", "SortError",
    "TotalityError", "UnverifiableError", "Sort", "EffectiveInfinitesimal", "Witness",
    "canonical_eps", "certify_monotone", "chain", "classify", "effective_wrt",
    "harmonic", "is_effective", "monotone_to_canonical", "validate_witness",
    "parse_cheap", "parse_expr", "parse_function", "parse_real", "CheapNumber",
    "compose", "eventually_eq", "eventually_leq", "eventually_lt", "from_expr",
    "from_function", "index_sum", "lift", "map_total", "omega", "patch", "shift_binary",
    "shift_unary", "evt_max", "ivt_zero", "refine_isolated_zero", "Trilean", "Verdict",
]
