"""Command-line front end: ``cheapreal VERB ...``.

Exit status is 0 when the command succeeded and every checked invariant held,
1 when a suite reported failures, and 2 on errors (bad input, sort errors,
sign-condition failures and the like).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import expr as E
from .creal import digits
from .dyadic import fraction_str
from .errors import CheapRealError, ParseError, UnknownSuiteError
from .infinitesimal import classify, effective_wrt
from .parse import parse_cheap, parse_function, parse_real
from .seq import CheapNumber, from_expr
from .solver import evt_max, ivt_zero, refine_isolated_zero
from .suites import SUITES, run_suite
from .cfunc import synthesize

DEFAULT_BUDGET = 1000
DEFAULT_PRECISION = 20
BUDGET_ENV = "CHEAPREAL_BUDGET"

log = logging.getLogger("cheapreal")


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def rank_range(text: str) -> range:
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected a range like 0..10, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if a > b:
        raise argparse.ArgumentTypeError(f"empty rank range {text!r}")
    return range(a, b + 1)


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return positive_int(raw)
    except argparse.ArgumentTypeError as exc:
        raise SystemExit(f"cheapreal: invalid {BUDGET_ENV}: {exc}") from None


def read_input(arg: str) -> str:
    """The argument itself, or the contents of the file it names."""
    if arg.startswith("@"):
        return Path(arg[1:]).read_text()
    p = Path(arg)
    if len(arg) < 4096 and p.suffix in (".json", ".txt", ".expr") and p.is_file():
        return p.read_text()
    return arg


def load_cheap(arg: str) -> CheapNumber:
    text = read_input(arg).strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos, text) from None
        try:
            tree = E.from_json(obj)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, CheapRealError):
                raise
            raise ParseError(f"invalid expression tree ({type(exc).__name__}: {exc})", 0,
                             text) from None
        return from_expr(tree)
    return parse_cheap(text)


def load_function(arg: str):
    e, dom = parse_function(read_input(arg).strip())
    return synthesize(e, dom, label=read_input(arg).strip())


def decimal(q: Fraction, places: int = 10) -> str:
    """Plain decimal rendering, truncated; only for human-readable output."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole = q.numerator // q.denominator
    frac = (q - whole) * 10**places
    return f"{sign}{whole}.{int(frac):0{places}d}"


class Output:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.data: dict = {}

    def line(self, text: str = ""):
        if self.fmt == "text":
            print(text)

    def finish(self):
        if self.fmt == "json":
            print(json.dumps(self.data, indent=2, sort_keys=True))


# -- verbs ---------------------------------------------------------------------------


def cmd_eval(args, out: Output) -> int:
    x = load_cheap(args.expr)
    ranks = args.ranks if args.ranks is not None else range(args.rank, args.rank + 1)
    rows = [(n, fraction_str(Fraction(x.at(n)))) for n in ranks]
    try:
        shown = x.to_infix()
    except CheapRealError:
        shown = None
    out.data = {"expr": shown, "sort": x.sort.value,
                "rows": [{"rank": n, "value": v} for n, v in rows]}
    if shown is not None:
        out.line(f"# {shown}")
    for n, v in rows:
        out.line(f"{n}\t{v}")
    return 0


def cmd_classify(args, out: Output) -> int:
    x = load_cheap(args.expr)
    c = classify(x, args.budget)
    out.data = {"expr": x.to_infix(), **c.to_json()}
    out.line(f"{c.kind} (checked up to {c.checked_up_to}, budget {c.budget_used})")
    return 0


def cmd_witness(args, out: Output) -> int:
    eps, target = load_cheap(args.eps), load_cheap(args.target)
    w = effective_wrt(eps, target, min(args.budget, 256))
    if w is None:
        out.data = {"eps": eps.to_infix(), "target": target.to_infix(), "witness": None}
        out.line("none found")
        return 0
    upto = w.validated_upto
    first = [fraction_str(Fraction(w.index.at(n))) for n in range(min(8, upto))]
    try:
        shown = w.index.to_infix()
    except CheapRealError:
        shown = None
    out.data = {"eps": eps.to_infix(), "target": target.to_infix(),
                "construction": w.describe(), "index": shown, "first_components": first,
                "validated_ranks": [0, upto]}
    out.line(f"construction: {w.describe()}")
    if shown is not None:
        out.line(f"index: {shown}")
    out.line(f"index at ranks 0..{len(first) - 1}: {', '.join(first)}")
    out.line(f"validated: eps^(+index) <= target at ranks 0..{upto - 1}")
    return 0


def cmd_real(args, out: Output) -> int:
    x = parse_real(read_input(args.expr).strip())
    n = args.precision
    q = x.approx_fraction(n)
    places = max(1, (n * 3) // 10)
    d = digits(x, places)
    out.data = {"precision": n, "approx": fraction_str(q), "radius": f"2^-{n}", "digits": d}
    out.line(f"{fraction_str(q)} ± 2^-{n}")
    out.line(d)
    return 0


def cmd_root(args, out: Output) -> int:
    f = load_function(args.function)
    n = args.precision
    lo, hi = ivt_zero(f)
    a, b = lo.estimate(n), hi.estimate(n)
    out.data = {"function": f.label, "precision": n,
                "low": {"side": lo.side, "rank": n, "point": fraction_str(a),
                        "grid_size": lo.records[n].N},
                "high": {"side": hi.side, "rank": n, "point": fraction_str(b),
                         "grid_size": hi.records[n].N}}
    out.line(f"{lo.side} zero, rank {n}: {fraction_str(a)} ({decimal(a)})")
    out.line(f"{hi.side} zero, rank {n}: {fraction_str(b)} ({decimal(b)})")
    if args.isolated:
        z = refine_isolated_zero(f, None, n)
        zq = z.to_fraction()
        out.data["isolated"] = {"dyadic": fraction_str(zq), "radius": f"2^-{n}"}
        out.line(f"isolated zero: {decimal(zq, max(1, (n * 3) // 10))}… ± 2^-{n} "
                 f"({fraction_str(zq)})")
    return 0


def cmd_max(args, out: Output) -> int:
    f = load_function(args.function)
    n = args.precision
    point, value = evt_max(f)
    p = point.estimate(n)
    v = value.approx_fraction(n)
    out.data = {"function": f.label, "precision": n, "maximiser": fraction_str(p),
                "maximiser_side": point.side, "max": fraction_str(v), "radius": f"2^-{n}"}
    out.line(f"maximiser, rank {n}: {fraction_str(p)} ({decimal(p)})")
    out.line(f"max: {fraction_str(v)} ± 2^-{n} ({decimal(v)})")
    return 0


def cmd_check(args, out: Output) -> int:
    rep = run_suite(args.suite)
    out.data = rep.to_json()
    status = "PASS" if rep.passed else "FAIL"
    out.line(f"{rep.name}: {status} ({rep.checks} checks, {len(rep.failures)} failures, "
             f"{rep.seconds:.2f}s)")
    for f in rep.failures[:20]:
        out.line(f"  failure: {json.dumps(f, sort_keys=True, default=str)}")
    for k, v in rep.notes.items():
        out.line(f"  {k}: {json.dumps(v, sort_keys=True, default=str)}")
    return 0 if rep.passed else 1


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=positive_int, default=None,
                        help=f"rank budget for eventual checks (default {DEFAULT_BUDGET}, "
                             f"or ${BUDGET_ENV})")
    common.add_argument("-n", "--precision", type=positive_int, default=DEFAULT_PRECISION,
                        help="output precision: results within 2^-n")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cheapreal",
                                description="Cheap non-standard numbers and computable reals.")
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    s = sub.add_parser("eval", parents=[common], help="evaluate a cheap number at ranks")
    s.add_argument("expr", help="infix expression, JSON tree, or @file")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--rank", type=int, default=0)
    g.add_argument("--ranks", type=rank_range, default=None, metavar="A..B")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("classify", parents=[common],
                       help="infinitesimal / infinitely large / limited")
    s.add_argument("expr")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("witness", parents=[common], help="effectiveness witness for eps")
    s.add_argument("eps")
    s.add_argument("target", nargs="?", default="1/(omega+1)")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("real", parents=[common], help="digits of a computable real")
    s.add_argument("expr", help="e.g. 'sqrt(2) + 1/3'")
    s.set_defaults(func=cmd_real)

    s = sub.add_parser("root", parents=[common], help="zeros by the grid IVT procedure")
    s.add_argument("function", help="'EXPR on [a, b]' or @file")
    s.add_argument("--isolated", action="store_true",
                   help="also refine the zero, assuming it is the only one")
    s.set_defaults(func=cmd_root)

    s = sub.add_parser("max", parents=[common], help="maximum by the grid EVT procedure")
    s.add_argument("function")
    s.set_defaults(func=cmd_max)

    s = sub.add_parser("check", parents=[common], help="run an invariant suite")
    s.add_argument("suite", help="one of: " + ", ".join(sorted(SUITES)))
    s.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.budget is None:
        args.budget = default_budget()
    out = Output(args.format)
    try:
        code = args.func(args, out)
    except UnknownSuiteError as exc:
        print(f"cheapreal: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"cheapreal: parse error: {exc}", file=sys.stderr)
        return 2
    except CheapRealError as exc:
        print(f"cheapreal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cheapreal: {exc}", file=sys.stderr)
        return 2
    out.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
