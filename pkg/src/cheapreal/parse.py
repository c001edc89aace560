"""Infix syntax for cheap numbers, computable reals and interval functions.

Cheap numbers::

    omega, eps (= 2^-omega), 3, 2/3, 0.25, + - * / // ^, comparisons,
    shift(x, y), at(x, y), patch(x, {0: 9, 2: 1/2}), monus(x, y), min, max,
    floor, ceil, abs, isqrt, clog2, ilog2, nat, if(c, a, b),
    mu(m, cond[, cap[, gallop]]), iterate(v, step, init), guard(x, y, r[, fill]),
    run_min(x), run_max(x)

Functions are written ``EXPR on [a, b]`` over the variable ``x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import expr as E
from .errors import ParseError

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+(?:\.\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>//|<=|>=|==|!=|[-+*/^<>(),{}:\[\]])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), start))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


_UNARY_FUNCS = {"floor", "ceil", "abs", "isqrt", "clog2", "ilog2"}
_BINARY_FUNCS = {"monus", "min", "max"}
_CMP = {"<", "<=", ">", ">=", "==", "!="}
_KEYWORDS = {"omega", "eps", "and", "or", "not", "on", "gallop", "linear"}


def _fold(e: E.Expr) -> E.Expr:
    """Constant-fold division and negation of constants."""
    if isinstance(e, E.Unary) and e.op == "neg" and isinstance(e.arg, E.Const):
        return E.Const(-e.arg.value)
    if isinstance(e, E.Binary) and isinstance(e.left, E.Const) and isinstance(e.right, E.Const):
        if e.op == "div" and e.right.value != 0:
            return E.Const(Fraction(e.left.value) / e.right.value)
    return e


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.text)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}", tok)
        return tok

    def name(self) -> str:
        tok = self.tok
        if tok.kind != "name" or tok.text in _KEYWORDS:
            raise self.error("expected a variable name", tok)
        self.i += 1
        return tok.text

    def at_end(self):
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")

    # -- grammar

    def expr(self) -> E.Expr:
        left = self.conj()
        while self.accept("or"):
            left = E.Logic("or", (left, self.conj()))
        return left

    def conj(self) -> E.Expr:
        left = self.neg()
        while self.accept("and"):
            left = E.Logic("and", (left, self.neg()))
        return left

    def neg(self) -> E.Expr:
        if self.accept("not"):
            return E.Logic("not", (self.neg(),))
        return self.comparison()

    def comparison(self) -> E.Expr:
        left = self.sum()
        if self.tok.kind == "op" and self.tok.text in _CMP:
            op = self.tok.text
            self.i += 1
            return E.Cmp(op, left, self.sum())
        return left

    def sum(self) -> E.Expr:
        left = self.term()
        while True:
            if self.accept("+"):
                left = E.Binary("add", left, self.term())
            elif self.accept("-"):
                left = E.Binary("sub", left, self.term())
            else:
                return left

    def term(self) -> E.Expr:
        left = self.unary()
        while True:
            if self.accept("*"):
                left = E.Binary("mul", left, self.unary())
            elif self.accept("//"):
                left = E.Binary("idiv", left, self.unary())
            elif self.accept("/"):
                left = _fold(E.Binary("div", left, self.unary()))
            else:
                return left

    def unary(self) -> E.Expr:
        if self.accept("-"):
            return _fold(E.Unary("neg", self.unary()))
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> E.Expr:
        base = self.atom()
        if self.accept("^"):
            return E.Binary("pow", base, self.unary())
        return base

    def atom(self) -> E.Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return E.Const(Fraction(tok.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind != "name":
            found = tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", tok)
        self.i += 1
        word = tok.text
        if word == "omega":
            return E.Rank()
        if word == "eps":
            return E.Binary("pow", E.Const(2), E.Unary("neg", E.Rank()))
        if self.tok.text == "(" and self.tok.kind == "op":
            return self.call(word, tok)
        if word in _KEYWORDS:
            raise self.error(f"unexpected keyword {word!r}", tok)
        if word not in self.bound:
            raise self.error(f"unbound variable {word!r}", tok)
        return E.Var(word)

    def args(self, count: int) -> list[E.Expr]:
        out = [self.expr()]
        for _ in range(count - 1):
            self.expect(",")
            out.append(self.expr())
        return out

    def const(self) -> Fraction:
        tok = self.tok
        e = self.sum()
        if not isinstance(e, E.Const):
            raise self.error("expected a constant", tok)
        return Fraction(e.value)

    def natural(self) -> int:
        tok = self.tok
        v = self.const()
        if v.denominator != 1 or v < 0:
            raise self.error("expected a natural number", tok)
        return int(v)

    def call(self, word: str, tok: Token) -> E.Expr:
        self.expect("(")
        if word in _UNARY_FUNCS:
            (a,) = self.args(1)
            e = E.Unary(word, a)
        elif word in _BINARY_FUNCS:
            a, b = self.args(2)
            e = E.Binary(word, a, b)
        elif word == "shift":
            a, b = self.args(2)
            e = E.Shift(a, b)
        elif word == "at":
            a, b = self.args(2)
            e = E.Compose(a, b)
        elif word == "nat":
            (a,) = self.args(1)
            e = E.NatCheck(a)
        elif word == "if":
            c, a, b = self.args(3)
            e = E.Select(c, a, b)
        elif word in ("run_min", "run_max"):
            (a,) = self.args(1)
            e = E.Running(word[4:], a)
        elif word == "patch":
            base = self.expr()
            self.expect(",")
            self.expect("{")
            table = {}
            if not self.accept("}"):
                while True:
                    r = self.natural()
                    self.expect(":")
                    table[r] = self.const()
                    if self.accept("}"):
                        break
                    self.expect(",")
            e = E.Patch(base, table)
        elif word == "guard":
            num, den = self.args(2)
            self.expect(",")
            r = self.natural()
            fill = self.const() if self.accept(",") else Fraction(0)
            e = E.GuardedDiv(num, den, r, fill)
        elif word == "mu":
            var = self.name()
            self.expect(",")
            self.bound.append(var)
            cond = self.expr()
            self.bound.pop()
            cap, search = E.DEFAULT_MU_CAP, "linear"
            if self.accept(","):
                cap = self.natural()
                if self.accept(","):
                    t = self.tok
                    if self.accept("gallop"):
                        search = "gallop"
                    elif self.accept("linear"):
                        search = "linear"
                    else:
                        raise self.error("expected 'gallop' or 'linear'", t)
            e = E.Mu(var, cond, cap, search)
        elif word == "iterate":
            var = self.name()
            self.expect(",")
            self.bound.append(var)
            step = self.expr()
            self.bound.pop()
            self.expect(",")
            init = self.expr()
            e = E.Iterate(var, step, init)
        else:
            raise self.error(f"unknown function {word!r}", tok)
        self.expect(")")
        return e


def parse_expr(text: str) -> E.Expr:
    """Parse a cheap-number expression into a generator tree."""
    p = Parser(text)
    e = p.expr()
    p.at_end()
    if e.sort() is E.Sort.BOOL:
        raise ParseError("expression is a condition, not a number", 0, text)
    return e


def parse_cheap(text: str):
    from .seq import from_expr
    return from_expr(parse_expr(text), label=text.strip())


# -- functions on intervals ------------------------------------------------------


class _FuncParser(Parser):
    """Polynomial expressions in x with computable-real constants."""

    def __init__(self, text: str):
        super().__init__(text)

    def fexpr(self):
        from . import cfunc as C
        left = self.fterm()
        while True:
            if self.accept("+"):
                left = C.Add(left, self.fterm())
            elif self.accept("-"):
                left = C.Sub(left, self.fterm())
            else:
                return left

    def fterm(self):
        from . import cfunc as C
        left = self.funary()
        while True:
            if self.accept("*"):
                left = C.Mul(left, self.funary())
            elif self.accept("/"):
                tok = self.tok
                right = self.funary()
                if not isinstance(right, C.Const):
                    raise self.error("division only by constants", tok)
                if right.exact_value == 0:
                    raise self.error("division by zero", tok)
                if (isinstance(left, C.Const) and left.exact_value is not None
                        and right.exact_value is not None):
                    left = C.Const.rational(left.exact_value / right.exact_value)
                    continue
                left = C.Mul(left, C.Const.of(C.reciprocal_const(right, tok.pos, self.text)))
            else:
                return left

    def funary(self):
        from . import cfunc as C
        if self.accept("-"):
            inner = self.funary()
            if isinstance(inner, C.Const) and inner.exact_value is not None:
                return C.Const.rational(-inner.exact_value)
            return C.Sub(C.Const.rational(0), inner)
        if self.accept("+"):
            return self.funary()
        return self.fpower()

    def fpower(self):
        from . import cfunc as C
        base = self.fatom()
        if self.accept("^"):
            tok = self.tok
            if tok.kind != "num" or "." in tok.text:
                raise self.error("expected a natural exponent", tok)
            self.i += 1
            k = int(tok.text)
            if k > 64:
                raise self.error("exponent too large", tok)
            if isinstance(base, C.Const) and base.exact_value is not None:
                return C.Const.rational(base.exact_value ** k)
            return C.power(base, k)
        return base

    def fatom(self):
        from . import cfunc as C
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return C.Const.rational(Fraction(tok.text))
        if self.accept("("):
            e = self.fexpr()
            self.expect(")")
            return e
        if tok.kind == "name":
            self.i += 1
            if tok.text == "x":
                return C.Identity()
            if tok.text == "sqrt":
                from .creal import sqrt_rational
                self.expect("(")
                q = self.const()
                self.expect(")")
                if q < 0:
                    raise self.error("sqrt of a negative constant", tok)
                return C.Const.of(sqrt_rational(q))
            raise self.error(f"unknown name {tok.text!r} (functions use the variable x)", tok)
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", tok)


def parse_function(text: str):
    """Parse ``EXPR on [a, b]`` into (FuncExpr, (a, b))."""
    p = _FuncParser(text)
    e = p.fexpr()
    p.expect("on")
    p.expect("[")
    a = p.const()
    p.expect(",")
    b = p.const()
    p.expect("]")
    p.at_end()
    if a > b:
        raise ParseError(f"empty domain [{a}, {b}]", 0, text)
    return e, (a, b)


# -- computable reals ------------------------------------------------------------


class _RealParser(Parser):
    def rexpr(self):
        from . import creal as R
        left = self.rterm()
        while True:
            if self.accept("+"):
                left = R.add(left, self.rterm())
            elif self.accept("-"):
                left = R.sub(left, self.rterm())
            else:
                return left

    def rterm(self):
        from . import creal as R
        left = self.runary()
        while True:
            if self.accept("*"):
                left = R.mul(left, self.runary())
            elif self.accept("/"):
                tok = self.tok
                right = self.runary()
                e = R.find_nonzero_evidence(right, 64)
                if e is None:
                    raise self.error("divisor not separated from zero up to precision 2^-64", tok)
                left = R.div(left, right, e)
            else:
                return left

    def runary(self):
        from . import creal as R
        if self.accept("-"):
            return R.neg(self.runary())
        return self.ratom()

    def ratom(self):
        from . import creal as R
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return R.from_rational(Fraction(tok.text))
        if self.accept("("):
            e = self.rexpr()
            self.expect(")")
            return e
        if tok.kind == "name" and tok.text == "sqrt":
            self.i += 1
            self.expect("(")
            q = self.const()
            self.expect(")")
            if q < 0:
                raise self.error("sqrt of a negative constant", tok)
            return R.sqrt_rational(q)
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", tok)


def parse_real(text: str):
    p = _RealParser(text)
    r = p.rexpr()
    p.at_end()
    return r
