"""Exact linear systems over Q and over rational-function fields."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from flint import fmpq, fmpq_mat

from .algebra import MPoly, RatFun, VarTable

__all__ = ["Solution", "solve_linear", "nullspace_q", "rref_q"]


@dataclass(frozen=True)
class Solution:
    """Solution set ``particular + span(nullspace)``; ``particular`` is None
    when the system is inconsistent."""

    particular: list | None
    nullspace: list = field(default_factory=list)
    free_columns: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.particular is not None


def rref_q(rows: Sequence[Sequence]) -> tuple[fmpq_mat, list[int]]:
    """Reduced row echelon form over Q and its pivot columns."""
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    if nr == 0 or nc == 0:
        return fmpq_mat(nr, nc), []
    A = fmpq_mat(nr, nc, [fmpq(v) if not isinstance(v, fmpq) else v for row in rows for v in row])
    R, rank = A.rref()
    piv = []
    row = 0
    for c in range(nc):
        if row < rank and R[row, c] != 0:
            piv.append(c)
            row += 1
    return R, piv


def nullspace_q(rows: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    """Basis of the right nullspace over Q, one vector per free column.

    Vectors are in reduced echelon form: the free column carries 1 and the
    other free columns carry 0, so the basis is deterministic.
    """
    if not rows:
        n = ncols or 0
        return [[fmpq(1) if a == b else fmpq(0) for a in range(n)] for b in range(n)]
    R, piv = rref_q(rows)
    n = R.ncols()
    pivset = set(piv)
    out = []
    for f in range(n):
        if f in pivset:
            continue
        vec = [fmpq(0)] * n
        vec[f] = fmpq(1)
        for rw, pc in enumerate(piv):
            vec[pc] = -R[rw, f]
        out.append(vec)
    return out


def _is_numeric(system) -> bool:
    for row in system:
        for v in row:
            if isinstance(v, RatFun):
                if not v.is_constant():
                    return False
            elif isinstance(v, MPoly):
                if not v.is_constant():
                    return False
    return True


def _num(v) -> fmpq:
    if isinstance(v, (RatFun, MPoly)):
        return v.constant_value()
    return fmpq(v) if not isinstance(v, fmpq) else v


def solve_linear(system: Sequence[Sequence], rhs: Sequence | None = None,
                 table: VarTable | None = None) -> Solution:
    """Solve ``system · c = rhs`` exactly.

    Entries may be rationals, polynomials or rational functions. Numeric
    systems use FLINT's rational row reduction; parametric systems use
    fraction-free elimination with row-content removal after every step.
    """
    nrows = len(system)
    ncols = len(system[0]) if nrows else 0
    if rhs is None:
        rhs = [0] * nrows
    if len(rhs) != nrows:
        raise ValueError("right-hand side length does not match the number of rows")
    if any(len(row) != ncols for row in system):
        raise ValueError("ragged matrix")
    if table is None:
        for row in list(system) + [rhs]:
            for v in (row if isinstance(row, (list, tuple)) else [row]):
                if isinstance(v, (RatFun, MPoly)):
                    table = v.table
                    break
            if table is not None:
                break
    if _is_numeric(system) and _is_numeric([rhs]):
        return _solve_q(system, rhs, ncols, table)
    return _solve_fraction_free(system, rhs, ncols, table)


def _wrap(v: fmpq, table):
    return RatFun.const(v, table) if table is not None else v


def _solve_q(system, rhs, ncols, table) -> Solution:
    if not system:
        basis = [[_wrap(fmpq(int(a == b)), table) for a in range(ncols)] for b in range(ncols)]
        return Solution([_wrap(fmpq(0), table)] * ncols, basis, list(range(ncols)))
    rows = [[_num(v) for v in row] + [_num(b)] for row, b in zip(system, rhs)]
    R, piv = rref_q(rows)
    if ncols in piv:
        return Solution(None, [])
    part = [fmpq(0)] * ncols
    for rw, pc in enumerate(piv):
        part[pc] = R[rw, ncols]
    pivset = set(piv)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        vec = [fmpq(0)] * ncols
        vec[f] = fmpq(1)
        for rw, pc in enumerate(piv):
            vec[pc] = -R[rw, f]
        basis.append(vec)
    return Solution([_wrap(v, table) for v in part],
                    [[_wrap(v, table) for v in vec] for vec in basis],
                    [f for f in range(ncols) if f not in pivset])


def _to_ratfun(v, table) -> RatFun:
    if isinstance(v, RatFun):
        return v
    if isinstance(v, MPoly):
        return RatFun.from_poly(v)
    return RatFun.const(v, table)


def _row_primitive(row: list[MPoly]) -> list[MPoly]:
    g = None
    for v in row:
        if v.is_zero():
            continue
        g = v if g is None else g.gcd(v)
        if g.is_constant():
            break
    if g is None:
        return row
    if not g.is_constant():
        row = [v.exact_div(g) if not v.is_zero() else v for v in row]
    # rational content of the whole row
    from functools import reduce
    cs = [v.content() for v in row if not v.is_zero()]
    num = reduce(lambda a, b: a.gcd(b), (c.p for c in cs))
    den = reduce(lambda a, b: a * b // a.gcd(b), (c.q for c in cs))
    c = fmpq(num, den)
    if c != 1:
        row = [MPoly(v._p / c, v.table) for v in row]
    return row


def _solve_fraction_free(system, rhs, ncols, table) -> Solution:
    # clear denominators row by row
    mat: list[list[MPoly]] = []
    for row, b in zip(system, rhs):
        ents = [_to_ratfun(v, table) for v in list(row) + [b]]
        den = table.one()
        for e in ents:
            if not e.den.is_one():
                den = den * e.den.exact_div(den.gcd(e.den))
        mat.append(_row_primitive([e.num * den.exact_div(e.den) for e in ents]))
    nr = len(mat)
    used = [False] * nr
    pivots: list[tuple[int, int]] = []  # (row, col)
    for c in range(ncols):
        best = None
        for rr in range(nr):
            if used[rr] or mat[rr][c].is_zero():
                continue
            cost = (mat[rr][c].nterms(), mat[rr][c].total_degree())
            if best is None or cost < best[0]:
                best = (cost, rr)
        if best is None:
            continue
        pr = best[1]
        used[pr] = True
        a = mat[pr][c]
        prow = mat[pr]
        for rr in range(nr):
            if rr == pr or mat[rr][c].is_zero():
                continue
            f = mat[rr][c]
            g = a.gcd(f)
            a1 = a.exact_div(g)
            f1 = f.exact_div(g)
            mat[rr] = _row_primitive([a1 * x - f1 * y for x, y in zip(mat[rr], prow)])
        pivots.append((pr, c))
    # inconsistency: a row with zero coefficients but nonzero rhs
    for rr in range(nr):
        if not used[rr] and not mat[rr][ncols].is_zero():
            if all(v.is_zero() for v in mat[rr][:ncols]):
                return Solution(None, [])
    pivcols = {c: r for r, c in pivots}
    part = []
    for c in range(ncols):
        if c in pivcols:
            r = pivcols[c]
            part.append(RatFun(mat[r][ncols], mat[r][c]))
        else:
            part.append(RatFun.const(0, table))
    basis = []
    for f in range(ncols):
        if f in pivcols:
            continue
        vec = []
        for c in range(ncols):
            if c == f:
                vec.append(RatFun.const(1, table))
            elif c in pivcols:
                r = pivcols[c]
                vec.append(RatFun(-mat[r][f], mat[r][c]))
            else:
                vec.append(RatFun.const(0, table))
        basis.append(vec)
    return Solution(part, basis, [f for f in range(ncols) if f not in pivcols])
