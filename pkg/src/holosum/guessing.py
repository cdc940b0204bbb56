"""Recurrence guessing from exact data.

Values may be rationals or polynomials in variables kept symbolic (the
formal variable x of a generating polynomial, say). Each symbolic monomial
of an equation contributes one scalar equation, so a handful of data points
already pins down many unknowns.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from flint import fmpq

from .algebra import MPoly, RatFun, VarTable
from .linalg import solve_linear
from .ore import OreAlgebra, OrePoly

log = logging.getLogger(__name__)

__all__ = ["GuessProblem", "ValidationFailure", "guess_recurrence", "guessed_is_right_factor"]


class ValidationFailure(ArithmeticError):
    """A candidate fitted the data but fails on withheld points."""

    def __init__(self, msg, candidate=None, failures=()):
        super().__init__(msg)
        self.candidate = candidate
        self.failures = list(failures)


@dataclass
class GuessProblem:
    """Data ``key -> value`` for keys over ``vars``; guess in the shift of ``var``.

    ``degrees`` maps every coefficient variable (data variables and symbolic
    ones) to a degree bound, or is ``"auto"`` to escalate up to ``cap``.
    ``validation`` lists withheld keys; by default every fifth point is held
    out.
    """

    data: dict
    vars: tuple
    var: str
    order: int
    degrees: object = "auto"
    symbolic: tuple = ()
    table: VarTable | None = None
    validation: tuple | None = None
    cap: Mapping | None = None
    escalate_order: bool = True

    def __post_init__(self):
        self.vars = tuple(self.vars)
        self.symbolic = tuple(self.symbolic)
        if self.table is None:
            for v in self.data.values():
                if isinstance(v, (RatFun, MPoly)):
                    self.table = v.table
                    break
            else:
                from .algebra import default_table
                self.table = default_table()
        if self.var not in self.vars:
            raise ValueError(f"shift variable {self.var} is not a data variable")
        if self.validation is None:
            keys = sorted(self.data)
            self.validation = tuple(keys[4::5])
        if not self.validation:
            raise ValueError("validation set is empty")
        if set(self.validation) - set(self.data):
            raise ValueError("validation keys missing from the data")

    @classmethod
    def auto(cls, data: dict, vars, var: str, table: VarTable | None = None,
             order: int = 4, symbolic=()) -> "GuessProblem":
        if var.startswith("S_"):
            var = var[2:]
        return cls(dict(data), tuple(vars), var, order, "auto", tuple(symbolic), table)

    @property
    def coeff_vars(self) -> tuple:
        return tuple(self.symbolic) + tuple(self.vars)

    def fitting(self) -> list:
        held = set(self.validation)
        return [k for k in sorted(self.data) if k not in held]


def _as_poly(v, table: VarTable) -> MPoly:
    if isinstance(v, MPoly):
        return v
    if isinstance(v, RatFun):
        if not v.den.is_constant():
            raise ValueError("data values must be polynomial in the symbolic variables")
        return v.num * (1 / v.den.constant_value())
    return table.const(v)


def _shifted_key(p: GuessProblem, key: tuple, j: int) -> tuple:
    pos = p.vars.index(p.var)
    return key[:pos] + (key[pos] + j,) + key[pos + 1:]


def _usable(p: GuessProblem, keys, order: int) -> list:
    return [k for k in keys if all(_shifted_key(p, k, j) in p.data for j in range(order + 1))]


def _monomials(p: GuessProblem, degrees: Mapping) -> list[tuple]:
    names = p.coeff_vars
    return list(itertools.product(*[range(degrees.get(v, 0) + 1) for v in names]))


def _mono_value(p: GuessProblem, mono: tuple, key: tuple) -> MPoly:
    table = p.table
    out = table.one()
    names = p.coeff_vars
    point = dict(zip(p.vars, key))
    for v, e in zip(names, mono):
        if not e:
            continue
        if v in point:
            out = out * (fmpq(point[v]) ** e)
        else:
            out = out * table.var(v) ** e
    return out


def _equations(p: GuessProblem, keys, order: int, monos) -> list[list]:
    table = p.table
    sym_idx = [table.index(v) for v in p.symbolic]
    rows = []
    polys = {k: _as_poly(v, table) for k, v in p.data.items()}
    for key in keys:
        entries = []
        for j in range(order + 1):
            g = polys[_shifted_key(p, key, j)]
            for mono in monos:
                entries.append(_mono_value(p, mono, key) * g)
        # one equation per symbolic monomial
        by_mono: dict = {}
        for c, poly in enumerate(entries):
            for e, coef in poly.terms():
                sk = tuple(e[i] for i in sym_idx)
                by_mono.setdefault(sk, {})[c] = coef
        for sk in sorted(by_mono):
            row = [fmpq(0)] * len(entries)
            for c, coef in by_mono[sk].items():
                row[c] = coef
            rows.append(row)
    return rows


def _operator(p: GuessProblem, vec, order: int, monos) -> OrePoly:
    table = p.table
    alg = OreAlgebra([p.var], table)
    names = p.coeff_vars
    coeffs = []
    n = len(monos)
    for j in range(order + 1):
        poly = table.zero()
        for a, mono in enumerate(monos):
            c = vec[j * n + a]
            if c == 0:
                continue
            term = table.const(c)
            for v, e in zip(names, mono):
                if e:
                    term = term * table.var(v) ** e
            poly = poly + term
        coeffs.append(RatFun.from_poly(poly))
    return alg.from_univariate(alg.symbols[0], coeffs).normalize()


def annihilates(p: GuessProblem, op: OrePoly, key: tuple) -> bool:
    coeffs = op.coefficients(op.alg.symbols[0])
    point = dict(zip(p.vars, key))
    acc = RatFun.const(0, p.table)
    for j, c in enumerate(coeffs):
        if c.is_zero():
            continue
        nk = _shifted_key(p, key, j)
        if nk not in p.data:
            return True
        acc = acc + c.subs(point) * RatFun.from_poly(_as_poly(p.data[nk], p.table))
    return acc.is_zero()


def _degree_schedule(p: GuessProblem):
    names = p.coeff_vars
    if p.degrees != "auto":
        yield dict(p.degrees)
        return
    cap = dict(p.cap or {})
    bounds = [cap.get(v, 2) for v in names]
    vecs = list(itertools.product(*[range(b + 1) for b in bounds]))
    vecs.sort(key=lambda e: (sum(e), e))
    for e in vecs:
        yield dict(zip(names, e))


def _try(p: GuessProblem, order: int, degrees: Mapping):
    monos = _monomials(p, degrees)
    keys = _usable(p, p.fitting(), order)
    nunk = (order + 1) * len(monos)
    rows = _equations(p, keys, order, monos)
    if len(rows) <= nunk:
        return None
    sol = solve_linear(rows)
    if not sol.nullspace:
        return None
    # reduced-echelon basis vector with the earliest free column
    vec = [c.constant_value() if isinstance(c, RatFun) else c for c in sol.nullspace[0]]
    return _operator(p, vec, order, monos)


def guess_recurrence(p: GuessProblem) -> OrePoly | None:
    """Operator in the shift of ``p.var`` annihilating all the data, or None."""
    orders = range(1, p.order + 1) if p.escalate_order else [p.order]
    for order in orders:
        for degrees in _degree_schedule(p):
            op = _try(p, order, degrees)
            if op is None:
                continue
            if op.order(op.alg.symbols[0]) < 1:
                continue
            bad = [k for k in p.validation if not annihilates(p, op, k)]
            if bad:
                raise ValidationFailure("candidate fails on withheld data", op, bad)
            bad = [k for k in p.data if not annihilates(p, op, k)]
            if bad:
                raise ValidationFailure("candidate fails on fitting data", op, bad)
            log.info("guessed order %d with degrees %s", order, degrees)
            return op
    return None


def guessed_is_right_factor(big: OrePoly, guessed: OrePoly, shift: str) -> bool:
    """True iff ``big = Q·guessed`` for some operator Q."""
    return guessed.is_right_factor_of(big, shift)
