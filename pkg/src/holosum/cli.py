"""Command-line entry point.

Exit codes: 0 success, 1 mathematical failure (not summable, failed
verification, no recurrence found), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .algebra import DEFAULT_VARS, ParseError, default_table, format_ratfun, parse_ratfun
from .hyperterm import COMBINATORIAL, EXTENDED, HyperTerm, parse_term
from .ore import OreAlgebra, parse_operator

EXIT_OK, EXIT_MATH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, text: str, record: dict):
    if args.format == "machine":
        print(json.dumps(record, sort_keys=True, separators=(",", ":")))
    else:
        print(text)


def _int_range(text: str) -> list[int]:
    """``2,3`` or ``1-6`` or a mix such as ``1-3,5``."""
    out = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.rsplit("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}")
    return out


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _term(args, sumvars) -> HyperTerm:
    table = default_table()
    try:
        t = parse_term(args.term, sumvars, (), table)
    except ParseError as exc:
        raise UsageError(f"--term: {exc}")
    except (KeyError, ValueError) as exc:
        raise UsageError(f"--term: {exc} (variables must be among {', '.join(DEFAULT_VARS)})")
    for v in sumvars:
        if v not in table:
            raise UsageError(f"unknown variable {v!r}")
    params = tuple(sorted(t.variables() - set(sumvars) - {"eps"}, key=table.index))
    return t.with_vars(tuple(sumvars), params)


def _shifts(text: str) -> list[str]:
    out = []
    for v in _names(text):
        v = v[2:] if v.startswith("S_") else v
        if v not in default_table():
            raise UsageError(f"--shifts: unknown variable {v!r}")
        out.append(v)
    return out


# ----------------------------------------------------------------- commands

def cmd_eval(args):
    from .gs import eval_gs, eval_gs_normalized
    if args.convention == EXTENDED:
        p = eval_gs_normalized(args.b, args.m, args.s, convention=EXTENDED)
    else:
        p = eval_gs(args.b, args.m, args.s)
    _emit(args, str(p), {"kind": "polynomial", "b": args.b, "m": args.m, "s": args.s,
                         "value": str(p)})
    return EXIT_OK


def cmd_eval_split(args):
    from .gs import eval_gs_split
    g1, g2 = eval_gs_split(args.b, args.m, args.s)
    _emit(args, f"G1: {g1}\nG2: {g2}", {"kind": "split", "b": args.b, "m": args.m,
                                        "s": args.s, "G1": str(g1), "G2": str(g2)})
    return EXIT_OK


def cmd_gosper(args):
    from .telescoping import gosper
    t = _term(args, [args.var])
    q = gosper(t, args.var)
    if q is None:
        _emit(args, "not summable", {"kind": "gosper", "summable": False})
        return EXIT_MATH
    _emit(args, format_ratfun(q), {"kind": "gosper", "summable": True,
                                   "certificate": format_ratfun(q)})
    return EXIT_OK


def _ct_out(args, res):
    _emit(args, res.text(), {"kind": "ct", **res.to_record()})
    return EXIT_OK if res.verified else EXIT_MATH


def cmd_zeilberger(args):
    from .telescoping import CTFailure, zeilberger
    t = _term(args, [args.var])
    try:
        res = zeilberger(t, args.var, _shifts(args.shifts), args.max_order, args.degree_budget,
                         seed=args.seed)
    except CTFailure as exc:
        _emit(args, f"no telescoper: {exc}", {"kind": "ct", "error": str(exc)})
        return EXIT_MATH
    return _ct_out(args, res)


def cmd_multisum(args):
    from .telescoping import PROFILES, CTFailure, multisum_ct
    sv = _names(args.vars)
    t = _term(args, sv)
    profiles = tuple(_names(args.profiles)) if args.profiles else PROFILES
    for p in profiles:
        if p not in PROFILES:
            raise UsageError(f"--profiles: unknown profile {p!r}")
    try:
        res = multisum_ct(t, sv, _shifts(args.shifts), args.max_order, args.degree_budget,
                          profiles, seed=args.seed)
    except CTFailure as exc:
        _emit(args, f"no telescoper: {exc}", {"kind": "ct", "error": str(exc)})
        return EXIT_MATH
    return _ct_out(args, res)


def _operator(text: str, shifts):
    alg = OreAlgebra(shifts, default_table())
    try:
        return parse_operator(text, alg)
    except (ParseError, ValueError, KeyError) as exc:
        raise UsageError(f"operator {text!r}: {exc}")


def cmd_verify(args):
    from .telescoping import CTResult, verify_ct
    sv = []
    certs = {}
    for item in args.cert:
        if "=" not in item:
            raise UsageError(f"--cert expects var=expression, got {item!r}")
        v, expr = item.split("=", 1)
        v = v.strip()
        try:
            certs[v] = parse_ratfun(expr, default_table())
        except (ParseError, ValueError, KeyError) as exc:
            raise UsageError(f"--cert {v}: {exc}")
        sv.append(v)
    t = _term(args, sv)
    P = _operator(args.telescoper, _shifts(args.shifts))
    from .algebra import RatFun
    res = CTResult(P, certs, RatFun.const(0, t.table))
    r = verify_ct(t, res)
    ok = r.is_zero()
    _emit(args, f"residual: {format_ratfun(r)}", {"kind": "verify", "residual": format_ratfun(r),
                                                   "ok": ok})
    return EXIT_OK if ok else EXIT_MATH


def _relation(args):
    from .boundary import SumSpec, assemble_relation
    from .telescoping import CTFailure, zeilberger
    t = _term(args, [args.var])
    try:
        lower = parse_ratfun(args.lower, default_table())
        upper = parse_ratfun(args.upper, default_table())
    except (ParseError, ValueError, KeyError) as exc:
        raise UsageError(f"bounds: {exc}")
    spec = SumSpec.make(args.var, lower.num, upper.num, t)
    try:
        ct = zeilberger(t, args.var, _shifts(args.shifts), args.max_order, args.degree_budget)
    except CTFailure as exc:
        return None, str(exc)
    return assemble_relation(spec, ct), None


def cmd_assemble(args):
    rel, err = _relation(args)
    if rel is None:
        _emit(args, f"no telescoper: {err}", {"kind": "relation", "error": err})
        return EXIT_MATH
    _emit(args, rel.text(), {"kind": "relation", **rel.to_record()})
    return EXIT_OK


def cmd_homogenize(args):
    from .boundary import RelationError, homogenize
    rel, err = _relation(args)
    if rel is None:
        _emit(args, f"no telescoper: {err}", {"kind": "operator", "error": err})
        return EXIT_MATH
    try:
        op = homogenize(rel)
    except RelationError as exc:
        _emit(args, f"homogenization failed: {exc}", {"kind": "operator", "error": str(exc)})
        return EXIT_MATH
    _emit(args, str(op), {"kind": "operator", "operator": op.to_record()})
    return EXIT_OK


def _degrees(text: str | None):
    if not text:
        return None
    out = {}
    for item in _names(text):
        if "=" not in item:
            raise UsageError(f"--degrees expects var=bound items, got {item!r}")
        v, d = item.split("=", 1)
        try:
            out[v.strip()] = int(d)
        except ValueError:
            raise UsageError(f"--degrees: bad bound {d!r}")
    return out


def cmd_guess(args):
    from .guessing import GuessProblem, ValidationFailure, guess_recurrence
    from .gs import guess_gs
    degrees = _degrees(args.degrees)
    try:
        if args.values is not None:
            try:
                vals = [parse_ratfun(v, default_table()) for v in args.values.split(",")]
            except (ParseError, ValueError, KeyError) as exc:
                raise UsageError(f"--values: {exc}")
            var = args.var
            data = {(args.start + j,): v for j, v in enumerate(vals)}
            symbolic = tuple(sorted(set().union(*(v.variables() for v in vals)),
                                    key=default_table().index))
            prob = GuessProblem(data, (var,), var, args.order,
                                degrees or "auto", symbolic, default_table())
            op = guess_recurrence(prob)
        else:
            op = guess_gs(args.bs, args.ms, args.ss, args.order, degrees)
    except ValidationFailure as exc:
        _emit(args, f"validation failed: {exc}", {"kind": "operator", "error": str(exc)})
        return EXIT_MATH
    if op is None:
        _emit(args, "no recurrence found", {"kind": "operator", "operator": None})
        return EXIT_MATH
    _emit(args, str(op), {"kind": "operator", "operator": op.to_record()})
    return EXIT_OK


def _report_out(args, rep, ok: bool):
    text = rep.text()
    _emit(args, text, {"kind": "pipeline", **rep.to_record()})
    return EXIT_OK if ok else EXIT_MATH


def cmd_prove_toy(args):
    from .gs import prove_toy
    rep = prove_toy()
    return _report_out(args, rep, all(rep.flags.values()))


def cmd_prove_gs(args):
    from .gs import PipelineError, guess_gs, prove_gs
    from .telescoping import CTFailure
    grid = [(b, m, s) for b in args.grid_b for m in args.grid_m for s in args.grid_s]
    guessed = guess_gs() if args.compare else None
    try:
        rep = prove_gs(args.mode, args.max_order, grid, guessed, args.degree_budget,
                       jobs=args.jobs)
    except CTFailure as exc:
        _emit(args, f"creative telescoping failed: {exc}", {"kind": "pipeline",
                                                           "error": "ct", "detail": str(exc)})
        return EXIT_MATH
    except PipelineError as exc:
        _emit(args, f"pipeline failed at {exc.stage}: {exc}",
              {"kind": "pipeline", "error": exc.stage, "detail": str(exc)})
        return EXIT_MATH
    ok = all(rep.flags.values()) and rep.comparison in (None, "equal", "right-factor")
    return _report_out(args, rep, ok)


def cmd_gf_check(args):
    from .gs import gf_check
    rep = gf_check(args.M, args.S)
    _emit(args, rep.text(), {"kind": "gf", "unit": rep.unit,
                             "matches": [list(k) for k in rep.matches],
                             "mismatches": [list(k) for k in rep.mismatches]})
    return EXIT_OK if rep.ok else EXIT_MATH


def cmd_benchmark(args):
    from .gs import STRATEGIES, benchmark, format_benchmark
    names = _names(args.strategies) if args.strategies is not None else list(STRATEGIES)
    for n in names:
        if n not in STRATEGIES:
            raise UsageError(f"--strategies: unknown strategy {n!r}")
    rows = benchmark(names)
    if args.format == "machine":
        for r in rows:
            print(json.dumps(r, sort_keys=True, separators=(",", ":")))
    elif rows:
        print(format_benchmark(rows))
    return EXIT_OK


# ----------------------------------------------------------------- parser

def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=_positive, default=1)
    common.add_argument("--convention", choices=(COMBINATORIAL, EXTENDED), default=COMBINATORIAL)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="holosum", description="Exact holonomic summation tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    for name, fn, help_ in (("eval", cmd_eval, "evaluate G_s(x)"),
                            ("eval-split", cmd_eval_split, "evaluate the two parts of G_s(x)")):
        sp = add(name, fn, help_)
        sp.add_argument("--b", type=int, default=None, help="omit for symbolic b")
        sp.add_argument("--m", type=_nonneg, required=True)
        sp.add_argument("--s", type=_nonneg, required=True)

    sp = add("gosper", cmd_gosper, "indefinite hypergeometric summation")
    sp.add_argument("--term", required=True)
    sp.add_argument("--var", required=True)

    def ct_flags(sp, multi=False):
        sp.add_argument("--term", required=True)
        if multi:
            sp.add_argument("--vars", required=True, help="comma-separated summation variables")
            sp.add_argument("--profiles", default=None)
        else:
            sp.add_argument("--var", required=True)
        sp.add_argument("--shifts", required=True, help="telescoper shift variables")
        sp.add_argument("--max-order", type=_positive, default=3)
        sp.add_argument("--degree-budget", type=_nonneg, default=6)

    ct_flags(add("zeilberger", cmd_zeilberger, "single-sum creative telescoping"))
    ct_flags(add("multisum-ct", cmd_multisum, "multisum creative telescoping"), multi=True)

    sp = add("verify-ct", cmd_verify, "check a telescoper/certificate pair")
    sp.add_argument("--term", required=True)
    sp.add_argument("--telescoper", required=True)
    sp.add_argument("--shifts", required=True)
    sp.add_argument("--cert", action="append", required=True, help="var=expression")

    for name, fn, help_ in (("assemble", cmd_assemble, "inhomogeneous relation for a definite sum"),
                            ("homogenize", cmd_homogenize, "homogeneous recurrence for a sum")):
        sp = add(name, fn, help_)
        ct_flags(sp)
        sp.add_argument("--lower", required=True)
        sp.add_argument("--upper", required=True)

    sp = add("guess", cmd_guess, "guess a recurrence from exact data")
    sp.add_argument("--values", default=None, help="comma-separated terms of a sequence")
    sp.add_argument("--var", default="n")
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--order", type=_positive, default=3)
    sp.add_argument("--degrees", default=None, help="e.g. x=2,b=1,m=1,s=1")
    sp.add_argument("--bs", type=_int_range, default=[2, 3, 4, 5])
    sp.add_argument("--ms", type=_int_range, default=list(range(1, 7)))
    sp.add_argument("--ss", type=_int_range, default=list(range(1, 11)))

    add("prove-toy", cmd_prove_toy, "worked single-sum example with boundary repair")

    sp = add("prove-gs", cmd_prove_gs, "derive and verify the recurrence for G_s")
    sp.add_argument("--mode", choices=("one-gamma", "two-gamma", "naive"), default="one-gamma")
    sp.add_argument("--max-order", type=_positive, default=4)
    sp.add_argument("--degree-budget", type=_nonneg, default=7)
    sp.add_argument("--grid-b", type=_int_range, default=[2, 3])
    sp.add_argument("--grid-m", type=_int_range, default=list(range(1, 7)))
    sp.add_argument("--grid-s", type=_int_range, default=list(range(1, 7)))
    sp.add_argument("--no-compare", dest="compare", action="store_false",
                    help="skip the comparison with the guessed operator")

    sp = add("gf-check", cmd_gf_check, "compare the rational generating function with G")
    sp.add_argument("--M", type=_positive, default=8)
    sp.add_argument("--S", type=_positive, default=8)

    sp = add("benchmark", cmd_benchmark, "time the strategies")
    sp.add_argument("--strategies", default=None, help="comma-separated; empty for none")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s %(message)s")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"holosum {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
