"""Generator descriptions for cheap numbers.

Every stored cheap number is a closed expression over a small basis: the rank
variable ``omega``, exact constants, componentwise arithmetic, comparisons and
case splits, shifts, composition and bounded minimisation.  Nodes are frozen
dataclasses; ``ev(n, env)`` evaluates a node at rank ``n`` with bound
variables taken from ``env``.

Values are ``int`` when integral and ``Fraction`` otherwise.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Any, Callable, Mapping

from .dyadic import ceil_log2, floor_log2, fraction_str
from .errors import MuCapExceeded, NotSerializableError, SortError, TotalityError

DEFAULT_MU_CAP = 10**6


class Sort(enum.Enum):
    NAT = "nat"
    RAT = "rat"
    BOOL = "bool"


def norm(v):
    """Collapse integral Fractions to int so Nat values stay plain ints."""
    if type(v) is int:
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def as_nat(v, what: str = "value", rank: int | None = None) -> int:
    if type(v) is int and v >= 0:
        return v
    v = norm(v)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        where = f" at rank {rank}" if rank is not None else ""
        raise SortError(f"{what} must be a natural number{where}, got {v!r}")
    return v


def as_int(v, what: str = "value", rank: int | None = None) -> int:
    v = norm(v)
    if isinstance(v, bool) or not isinstance(v, int):
        where = f" at rank {rank}" if rank is not None else ""
        raise SortError(f"{what} must be an integer{where}, got {v!r}")
    return v


def _join(a: Sort, b: Sort) -> Sort:
    return Sort.NAT if a is Sort.NAT and b is Sort.NAT else Sort.RAT


class Expr:
    """Base class; subclasses are frozen dataclasses."""

    def ev(self, n: int, env: Mapping[str, int]):
        raise NotImplementedError

    def sort(self) -> Sort:
        raise NotImplementedError

    def children(self) -> tuple[Expr, ...]:
        return ()

    def to_json(self) -> dict:
        raise NotImplementedError

    def infix(self) -> str:
        raise NotImplementedError

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for c in self.children():
            out |= c.free_vars()
        return out

    def __str__(self):
        return self.infix()


# -- leaves ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: int | Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", norm(Fraction(self.value)))

    def ev(self, n, env):
        return self.value

    def sort(self):
        v = self.value
        return Sort.NAT if isinstance(v, int) and v >= 0 else Sort.RAT

    def to_json(self):
        return {"kind": "const", "value": fraction_str(self.value)}

    def infix(self):
        s = fraction_str(self.value)
        return s if isinstance(self.value, int) and self.value >= 0 else f"({s})"


@dataclass(frozen=True, eq=False)
class Rank(Expr):
    def ev(self, n, env):
        return n

    def sort(self):
        return Sort.NAT

    def to_json(self):
        return {"kind": "omega"}

    def infix(self):
        return "omega"


@dataclass(frozen=True, eq=False)
class Var(Expr):
    name: str

    def ev(self, n, env):
        try:
            return env[self.name]
        except KeyError:
            raise SortError(f"unbound variable {self.name!r}") from None

    def sort(self):
        return Sort.NAT

    def free_vars(self):
        return frozenset([self.name])

    def to_json(self):
        return {"kind": "var", "name": self.name}

    def infix(self):
        return self.name


# -- arithmetic --------------------------------------------------------------


def _clog2(v):
    if v <= 0:
        raise TotalityError(f"clog2 of non-positive value {v}")
    return ceil_log2(v)


def _ilog2(v):
    if v <= 0:
        raise TotalityError(f"ilog2 of non-positive value {v}")
    return floor_log2(v)


def _isqrt(v):
    return isqrt(as_nat(v, "isqrt argument"))


def _floor(v):
    return v.__floor__() if isinstance(v, Fraction) else v


def _ceil(v):
    return v.__ceil__() if isinstance(v, Fraction) else v


UNARY_OPS: dict[str, Callable] = {
    "neg": lambda v: -v,
    "floor": _floor,
    "ceil": _ceil,
    "abs": abs,
    "isqrt": _isqrt,
    "clog2": _clog2,
    "ilog2": _ilog2,
}


def _div(a, b):
    if b == 0:
        raise TotalityError("division by a zero component")
    return Fraction(a) / b


def _idiv(a, b):
    if b == 0:
        raise TotalityError("integer division by a zero component")
    return Fraction(a) // b


def _pow(a, b):
    b = as_int(b, "exponent")
    if b < 0:
        if a == 0:
            raise TotalityError("zero raised to a negative power")
        return Fraction(1) / Fraction(a) ** -b
    return a**b


BINARY_OPS: dict[str, Callable] = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _div,
    "idiv": _idiv,
    "monus": lambda a, b: max(0, a - b),
    "min": min,
    "max": max,
    "pow": _pow,
}

_INFIX_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "idiv": "//", "pow": "^"}


@dataclass(frozen=True, eq=False)
class Unary(Expr):
    op: str
    arg: Expr

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operation {self.op!r}")

    def ev(self, n, env):
        return norm(UNARY_OPS[self.op](self.arg.ev(n, env)))

    def sort(self):
        s = self.arg.sort()
        if self.op == "neg":
            return Sort.RAT
        if self.op in ("isqrt",):
            return Sort.NAT
        return s

    def children(self):
        return (self.arg,)

    def to_json(self):
        return {"kind": self.op, "children": [self.arg.to_json()]}

    def infix(self):
        if self.op == "neg":
            return f"(-{self.arg.infix()})"
        return f"{self.op}({self.arg.infix()})"


@dataclass(frozen=True, eq=False)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operation {self.op!r}")

    def ev(self, n, env):
        return norm(BINARY_OPS[self.op](self.left.ev(n, env), self.right.ev(n, env)))

    def sort(self):
        a, b = self.left.sort(), self.right.sort()
        if self.op in ("sub", "div"):
            return Sort.RAT
        return _join(a, b)

    def children(self):
        return (self.left, self.right)

    def to_json(self):
        return {"kind": self.op, "children": [self.left.to_json(), self.right.to_json()]}

    def infix(self):
        sym = _INFIX_SYMBOL.get(self.op)
        if sym:
            return f"({self.left.infix()} {sym} {self.right.infix()})"
        return f"{self.op}({self.left.infix()}, {self.right.infix()})"


CMP_OPS: dict[str, Callable] = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True, eq=False)
class Cmp(Expr):
    op: str
    left: Expr
    right: Expr

    def ev(self, n, env):
        return CMP_OPS[self.op](self.left.ev(n, env), self.right.ev(n, env))

    def sort(self):
        return Sort.BOOL

    def children(self):
        return (self.left, self.right)

    def to_json(self):
        return {"kind": "cmp", "op": self.op,
                "children": [self.left.to_json(), self.right.to_json()]}

    def infix(self):
        return f"({self.left.infix()} {self.op} {self.right.infix()})"


@dataclass(frozen=True, eq=False)
class Logic(Expr):
    op: str  # and, or, not
    args: tuple[Expr, ...]

    def ev(self, n, env):
        if self.op == "not":
            return not self.args[0].ev(n, env)
        if self.op == "and":
            return all(a.ev(n, env) for a in self.args)
        return any(a.ev(n, env) for a in self.args)

    def sort(self):
        return Sort.BOOL

    def children(self):
        return self.args

    def to_json(self):
        return {"kind": self.op, "children": [a.to_json() for a in self.args]}

    def infix(self):
        if self.op == "not":
            return f"(not {self.args[0].infix()})"
        return "(" + f" {self.op} ".join(a.infix() for a in self.args) + ")"


@dataclass(frozen=True, eq=False)
class Select(Expr):
    cond: Expr
    then: Expr
    other: Expr

    def ev(self, n, env):
        return self.then.ev(n, env) if self.cond.ev(n, env) else self.other.ev(n, env)

    def sort(self):
        return _join(self.then.sort(), self.other.sort())

    def children(self):
        return (self.cond, self.then, self.other)

    def to_json(self):
        return {"kind": "if", "children": [c.to_json() for c in self.children()]}

    def infix(self):
        return f"if({self.cond.infix()}, {self.then.infix()}, {self.other.infix()})"


@dataclass(frozen=True, eq=False)
class Patch(Expr):
    """Finitely many ranks overridden by constants; ``base`` elsewhere."""

    base: Expr
    table: Mapping[int, Any]

    def __post_init__(self):
        clean = {as_nat(k, "patch rank"): norm(Fraction(v)) for k, v in dict(self.table).items()}
        object.__setattr__(self, "table", dict(sorted(clean.items())))

    def ev(self, n, env):
        if n in self.table:
            return self.table[n]
        return self.base.ev(n, env)

    def sort(self):
        s = self.base.sort()
        if s is Sort.NAT and all(isinstance(v, int) and v >= 0 for v in self.table.values()):
            return Sort.NAT
        return Sort.RAT

    def children(self):
        return (self.base,)

    def to_json(self):
        return {"kind": "patch", "children": [self.base.to_json()],
                "overrides": {str(k): fraction_str(v) for k, v in self.table.items()}}

    def infix(self):
        items = ", ".join(f"{k}: {Const(v).infix()}" for k, v in self.table.items())
        return f"patch({self.base.infix()}, {{{items}}})"


# -- index operations ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Shift(Expr):
    """(x^{+y})_n = x_{n + y_n}."""

    base: Expr
    index: Expr

    def ev(self, n, env):
        k = as_nat(self.index.ev(n, env), "shift index", n)
        return self.base.ev(n + k, env)

    def sort(self):
        return self.base.sort()

    def children(self):
        return (self.base, self.index)

    def to_json(self):
        return {"kind": "shift", "children": [self.base.to_json(), self.index.to_json()]}

    def infix(self):
        return f"shift({self.base.infix()}, {self.index.infix()})"


@dataclass(frozen=True, eq=False)
class Compose(Expr):
    """x evaluated at rank y_n, i.e. x(y) for an index y."""

    base: Expr
    index: Expr

    def ev(self, n, env):
        return self.base.ev(as_nat(self.index.ev(n, env), "composition index", n), env)

    def sort(self):
        return self.base.sort()

    def children(self):
        return (self.base, self.index)

    def to_json(self):
        return {"kind": "at", "children": [self.base.to_json(), self.index.to_json()]}

    def infix(self):
        return f"at({self.base.infix()}, {self.index.infix()})"


@dataclass(frozen=True, eq=False)
class GuardedDiv(Expr):
    """x / y from rank ``from_rank`` on, ``fill`` below it."""

    num: Expr
    den: Expr
    from_rank: int
    fill: int | Fraction = 0

    def __post_init__(self):
        object.__setattr__(self, "from_rank", as_nat(self.from_rank, "guard rank"))
        object.__setattr__(self, "fill", norm(Fraction(self.fill)))

    def ev(self, n, env):
        if n < self.from_rank:
            return self.fill
        d = self.den.ev(n, env)
        if d == 0:
            raise TotalityError(
                f"divisor certified nonzero from rank {self.from_rank} is zero at rank {n}", n
            )
        return norm(Fraction(self.num.ev(n, env)) / d)

    def sort(self):
        return Sort.RAT

    def children(self):
        return (self.num, self.den)

    def to_json(self):
        return {"kind": "guard", "children": [self.num.to_json(), self.den.to_json()],
                "from_rank": self.from_rank, "fill": fraction_str(self.fill)}

    def infix(self):
        return (f"guard({self.num.infix()}, {self.den.infix()}, "
                f"{self.from_rank}, {Const(self.fill).infix()})")


@dataclass(frozen=True, eq=False)
class Mu(Expr):
    """Least m >= 0 with ``cond`` true when ``var`` is bound to m.

    With ``search="gallop"`` the predicate is assumed monotone in m
    (false ... false true ... true) and found by doubling then bisection.
    The cap bounds the number of predicate evaluations per rank.
    """

    var: str
    cond: Expr
    cap: int = DEFAULT_MU_CAP
    search: str = "linear"

    def __post_init__(self):
        if self.search not in ("linear", "gallop"):
            raise ValueError(f"unknown search mode {self.search!r}")

    def ev(self, n, env):
        local = dict(env)

        def holds(m):
            local[self.var] = m
            return bool(self.cond.ev(n, local))

        if self.search == "linear":
            for m in range(self.cap):
                if holds(m):
                    return m
            raise MuCapExceeded(n, self.cap)
        probes = 1
        if holds(0):
            return 0
        lo, hi = 0, 1
        while not holds(hi):
            probes += 1
            if probes > self.cap:
                raise MuCapExceeded(n, self.cap)
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            probes += 1
            if probes > self.cap:
                raise MuCapExceeded(n, self.cap)
            mid = (lo + hi) // 2
            if holds(mid):
                hi = mid
            else:
                lo = mid
        return hi

    def sort(self):
        return Sort.NAT

    def children(self):
        return (self.cond,)

    def free_vars(self):
        return self.cond.free_vars() - {self.var}

    def to_json(self):
        return {"kind": "mu", "var": self.var, "cap": self.cap, "search": self.search,
                "children": [self.cond.to_json()]}

    def infix(self):
        return f"mu({self.var}, {self.cond.infix()}, {self.cap}, {self.search})"


class _PrefixCache:
    """Incrementally extended list of values at ranks 0..k, guarded by a lock."""

    def __init__(self):
        self.values: list = []
        self.lock = threading.Lock()


@dataclass(frozen=True, eq=False)
class Iterate(Expr):
    """Solution of the shift equation v_{n+1} = step(v_n, n), v_0 = init.

    ``step`` refers to the previous value through ``var`` and to the rank
    through ``omega``.
    """

    var: str
    step: Expr
    init: Expr
    _cache: _PrefixCache = field(default_factory=_PrefixCache, repr=False, compare=False)

    def ev(self, n, env):
        if env:
            v = self.init.ev(0, env)
            for k in range(n):
                v = self.step.ev(k, {**env, self.var: v})
            return v
        c = self._cache
        with c.lock:
            if not c.values:
                c.values.append(self.init.ev(0, {}))
            while len(c.values) <= n:
                k = len(c.values) - 1
                c.values.append(self.step.ev(k, {self.var: c.values[-1]}))
            return c.values[n]

    def sort(self):
        return _join(self.step.sort(), self.init.sort())

    def children(self):
        return (self.step, self.init)

    def free_vars(self):
        return (self.step.free_vars() - {self.var}) | self.init.free_vars()

    def to_json(self):
        return {"kind": "iterate", "var": self.var,
                "children": [self.step.to_json(), self.init.to_json()]}

    def infix(self):
        return f"iterate({self.var}, {self.step.infix()}, {self.init.infix()})"


@dataclass(frozen=True, eq=False)
class Running(Expr):
    """Running minimum or maximum of ``arg`` over ranks 0..n."""

    op: str  # "min" | "max"
    arg: Expr
    _cache: _PrefixCache = field(default_factory=_PrefixCache, repr=False, compare=False)

    def ev(self, n, env):
        pick = min if self.op == "min" else max
        if env:
            return pick(self.arg.ev(k, env) for k in range(n + 1))
        c = self._cache
        with c.lock:
            while len(c.values) <= n:
                k = len(c.values)
                v = self.arg.ev(k, {})
                c.values.append(v if k == 0 else pick(c.values[-1], v))
            return c.values[n]

    def sort(self):
        return self.arg.sort()

    def children(self):
        return (self.arg,)

    def to_json(self):
        return {"kind": f"run_{self.op}", "children": [self.arg.to_json()]}

    def infix(self):
        return f"run_{self.op}({self.arg.infix()})"


@dataclass(frozen=True, eq=False)
class NatCheck(Expr):
    """Dynamic coercion to the Nat sort; raises SortError on a bad component."""

    arg: Expr

    def ev(self, n, env):
        return as_nat(self.arg.ev(n, env), "nat() argument", n)

    def sort(self):
        return Sort.NAT

    def children(self):
        return (self.arg,)

    def to_json(self):
        return {"kind": "nat", "children": [self.arg.to_json()]}

    def infix(self):
        return f"nat({self.arg.infix()})"


@dataclass(frozen=True, eq=False)
class Opaque(Expr):
    """A Python callable rank -> value.  Used for test oracles and views."""

    fn: Callable[[int], Any]
    label: str = "opaque"
    value_sort: Sort = Sort.RAT

    def ev(self, n, env):
        return norm(self.fn(n))

    def sort(self):
        return self.value_sort

    def to_json(self):
        raise NotSerializableError(f"opaque generator {self.label!r} has no canonical form")

    def infix(self):
        raise NotSerializableError(f"opaque generator {self.label!r} has no canonical form")


@dataclass(frozen=True, eq=False)
class Ref(Expr):
    """Reference to a CheapNumber, sharing its memo table."""

    number: Any  # CheapNumber; typed loosely to avoid an import cycle

    def ev(self, n, env):
        return self.number.at(n)

    def sort(self):
        return self.number.sort

    def tree(self) -> Expr:
        return self.number.tree

    def children(self):
        return ()

    def to_json(self):
        return self.tree().to_json()

    def infix(self):
        return self.tree().infix()


# -- JSON ----------------------------------------------------------------------

_UNARY_KINDS = set(UNARY_OPS)
_BINARY_KINDS = set(BINARY_OPS)


def from_json(obj: Mapping) -> Expr:
    """Inverse of ``Expr.to_json``."""
    kind = obj["kind"]
    kids = [from_json(c) for c in obj.get("children", [])]
    if kind == "const":
        return Const(Fraction(obj["value"]))
    if kind == "omega":
        return Rank()
    if kind == "var":
        return Var(obj["name"])
    if kind in _UNARY_KINDS:
        return Unary(kind, *kids)
    if kind in _BINARY_KINDS:
        return Binary(kind, *kids)
    if kind == "cmp":
        return Cmp(obj["op"], *kids)
    if kind in ("and", "or", "not"):
        return Logic(kind, tuple(kids))
    if kind == "if":
        return Select(*kids)
    if kind == "patch":
        return Patch(kids[0], {int(k): Fraction(v) for k, v in obj["overrides"].items()})
    if kind == "shift":
        return Shift(*kids)
    if kind == "at":
        return Compose(*kids)
    if kind == "guard":
        return GuardedDiv(kids[0], kids[1], int(obj["from_rank"]), Fraction(obj.get("fill", "0")))
    if kind == "mu":
        return Mu(obj["var"], kids[0], int(obj.get("cap", DEFAULT_MU_CAP)),
                  obj.get("search", "linear"))
    if kind == "iterate":
        return Iterate(obj["var"], kids[0], kids[1])
    if kind in ("run_min", "run_max"):
        return Running(kind[4:], kids[0])
    if kind == "nat":
        return NatCheck(kids[0])
    raise ValueError(f"unknown expression kind {kind!r}")


def unwrap(e: Expr) -> Expr:
    """Replace Ref nodes by the trees they stand for (recursively)."""
    if isinstance(e, Ref):
        return unwrap(e.tree())
    return e


# -- monotonicity profile ------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Conservative shape facts about a closed expression.

    ``direction`` is "inc", "dec", "const" or None (unknown); ``positive``
    and ``nonneg`` hold at every rank when True.
    """

    direction: str | None
    positive: bool = False
    nonneg: bool = False

    @property
    def known(self) -> bool:
        return self.direction is not None


_UNKNOWN = Profile(None)


def _flip(d):
    return {"inc": "dec", "dec": "inc"}.get(d, d)


def _combine_same(a, b):
    """Direction of a monotone-increasing function of two arguments."""
    if a is None or b is None:
        return None
    if a == "const":
        return b
    if b == "const" or a == b:
        return a
    return None


def _from_direction(e: Expr, d, nonneg_hint=False) -> Profile:
    """Fill in positivity for increasing or constant expressions from rank 0."""
    if d in ("inc", "const") and not e.free_vars():
        try:
            v0 = e.ev(0, {})
        except Exception:
            return Profile(d)
        return Profile(d, positive=v0 > 0, nonneg=v0 >= 0)
    return Profile(d, nonneg=nonneg_hint)


def profile(e: Expr) -> Profile:
    """Monotonicity and sign profile of ``e`` (conservative)."""
    if isinstance(e, Ref):
        return profile(e.tree())
    if isinstance(e, Const):
        return Profile("const", e.value > 0, e.value >= 0)
    if isinstance(e, Rank):
        return Profile("inc", False, True)
    if isinstance(e, Unary):
        p = profile(e.arg)
        if not p.known:
            return _UNKNOWN
        if e.op == "neg":
            return Profile(_flip(p.direction))
        if e.op == "abs":
            if p.nonneg:
                return p
            return _UNKNOWN
        # floor, ceil, isqrt, clog2, ilog2 are non-decreasing maps
        return _from_direction(e, p.direction, p.nonneg and e.op in ("floor", "ceil", "isqrt"))
    if isinstance(e, Binary):
        a, b = profile(e.left), profile(e.right)
        if not (a.known and b.known):
            return _UNKNOWN
        op = e.op
        if op in ("add", "min", "max"):
            d = _combine_same(a.direction, b.direction)
            if d is None:
                return _UNKNOWN
            if d == "dec":
                if op == "add":
                    pos = (a.positive and b.nonneg) or (a.nonneg and b.positive)
                    return Profile(d, pos, a.nonneg and b.nonneg)
                if op == "min":
                    return Profile(d, a.positive and b.positive, a.nonneg and b.nonneg)
                return Profile(d, a.positive or b.positive, a.nonneg or b.nonneg)
            return _from_direction(e, d)
        if op == "sub":
            d = _combine_same(a.direction, _flip(b.direction))
            return _from_direction(e, d) if d else _UNKNOWN
        if op == "mul":
            if a.nonneg and b.nonneg:
                d = _combine_same(a.direction, b.direction)
                if d is None:
                    return _UNKNOWN
                if d == "dec":
                    return Profile(d, a.positive and b.positive, True)
                return _from_direction(e, d)
            for c, o in ((e.left, b), (e.right, a)):
                if isinstance(c, Const) and c.value < 0 and o.known:
                    return _from_direction(e, _flip(o.direction))
            return _UNKNOWN
        if op in ("div", "idiv"):
            if not b.positive:
                return _UNKNOWN
            if a.nonneg:
                d = _combine_same(a.direction, _flip(b.direction))
                if d is None:
                    return _UNKNOWN
                if d == "dec":
                    return Profile(d, a.positive and op == "div", True)
                return _from_direction(e, d)
            return _UNKNOWN
        if op == "pow":
            base, ex = e.left, b
            if isinstance(base, Const) and base.value > 0:
                if base.value == 1:
                    return Profile("const", True, True)
                d = ex.direction if base.value > 1 else _flip(ex.direction)
                if d == "dec":
                    return Profile(d, True, True)
                return _from_direction(e, d)
            if isinstance(e.right, Const) and a.nonneg:
                k = e.right.value
                if isinstance(k, int) and k >= 0:
                    d = a.direction if k > 0 else "const"
                    if d == "dec":
                        return Profile(d, a.positive, True)
                    return _from_direction(e, d)
            return _UNKNOWN
        return _UNKNOWN
    if isinstance(e, Shift) and isinstance(unwrap(e.index), Const):
        p = profile(e.base)
        if p.direction == "dec":
            return p
        return _from_direction(e, p.direction) if p.known else _UNKNOWN
    return _UNKNOWN
