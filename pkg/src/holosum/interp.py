"""Parametric kernel vectors by modular evaluation and interpolation.

Large ansatz systems with entries in Q[params] are not eliminated
symbolically. Instead the canonical kernel vector (reduced-echelon basis
vector of a chosen free column) is computed modulo word-size primes at many
parameter points, each coordinate is interpolated as a dense rational
function with degree bounds detected along lines, and the rational
coefficients are recovered by Chinese remaindering and rational
reconstruction. Callers must verify the result symbolically.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass

import numpy as np
from flint import fmpq, fmpz, nmod_mat

from .algebra import MPoly, RatFun, VarTable

log = logging.getLogger(__name__)

__all__ = ["ParamSystem", "kernel_vector", "InterpolationFailure", "PRIMES"]


def _primes(count: int, start: int = 2**31 - 1) -> list[int]:
    out = []
    n = start
    while len(out) < count:
        if fmpz(n).is_prime():
            out.append(n)
        n -= 2 if n % 2 else 1
    return out


PRIMES = _primes(40)


class InterpolationFailure(ArithmeticError):
    pass


class ParamSystem:
    """Sparse matrix with polynomial entries, compiled for fast evaluation."""

    def __init__(self, entries: dict, nrows: int, ncols: int, params: list[str],
                 table: VarTable):
        self.nrows = nrows
        self.ncols = ncols
        self.params = list(params)
        self.table = table
        pidx = [table.index(p) for p in self.params]
        monos: dict = {}
        rows, cols, starts, mono_ids, nums, dens = [], [], [], [], [], []
        for (r, c), poly in sorted(entries.items()):
            terms = poly.terms() if isinstance(poly, MPoly) else poly
            if not terms:
                continue
            rows.append(r)
            cols.append(c)
            starts.append(len(mono_ids))
            for e, coef in terms:
                key = tuple(e[j] for j in pidx)
                if any(e[j] for j in range(len(e)) if j not in pidx):
                    raise ValueError("entry depends on a non-parameter variable")
                mid = monos.setdefault(key, len(monos))
                mono_ids.append(mid)
                nums.append(int(coef.p))
                dens.append(int(coef.q))
        self.rows = np.array(rows, dtype=np.int64)
        self.cols = np.array(cols, dtype=np.int64)
        self.starts = np.array(starts, dtype=np.int64)
        self.mono_ids = np.array(mono_ids, dtype=np.int64)
        self.mono_exps = np.array(list(monos) or [[0] * len(pidx)], dtype=np.int64).reshape(
            -1, len(pidx))
        self.maxdeg = (self.mono_exps.max(axis=0) if len(monos) else np.zeros(len(pidx),
                                                                             dtype=np.int64))
        self._nums = nums
        self._dens = dens
        self._coef_cache: dict = {}

    def coeffs_mod(self, p: int) -> np.ndarray:
        hit = self._coef_cache.get(p)
        if hit is None:
            hit = np.array([(a % p) * pow(b, -1, p) % p for a, b in zip(self._nums, self._dens)],
                           dtype=np.int64)
            self._coef_cache[p] = hit
        return hit

    def entry_values(self, point: list[int], p: int) -> np.ndarray:
        monov = np.ones(len(self.mono_exps), dtype=np.int64)
        for j, z in enumerate(point):
            md = int(self.maxdeg[j]) if len(self.maxdeg) else 0
            if md == 0:
                continue
            pw = np.empty(md + 1, dtype=np.int64)
            pw[0] = 1
            for d in range(1, md + 1):
                pw[d] = pw[d - 1] * z % p
            monov = monov * pw[self.mono_exps[:, j]] % p
        if len(self.mono_ids) == 0:
            return np.zeros(0, dtype=np.int64)
        tv = self.coeffs_mod(p) * monov[self.mono_ids] % p
        return np.add.reduceat(tv, self.starts) % p

    def dense(self, point: list[int], p: int) -> np.ndarray:
        M = np.zeros((self.nrows, self.ncols), dtype=np.int64)
        if len(self.rows):
            M[self.rows, self.cols] = self.entry_values(point, p)
        return M


def _to_nmod(M: np.ndarray, p: int) -> nmod_mat:
    r, c = M.shape
    return nmod_mat(r, c, M.ravel().tolist(), p)


def _rref_info(M: np.ndarray, p: int):
    A = _to_nmod(M, p)
    R, rank = A.rref()
    piv = []
    row = 0
    ncols = M.shape[1]
    for c in range(ncols):
        if row < rank and int(R[row, c]) != 0:
            piv.append(c)
            row += 1
    return R, piv


@dataclass
class _Plan:
    pivots: list
    free_col: int
    rows: list


def _plan(system: ParamSystem, first_target: int, point, p) -> _Plan | None:
    M = system.dense(point, p)
    R, piv = _rref_info(M, p)
    pivset = set(piv)
    free = [c for c in range(system.ncols) if c not in pivset and c >= first_target]
    if not free:
        return None
    f = free[0]
    # independent rows of the pivot-column submatrix
    sub = M[:, piv]
    if piv:
        _, rowpiv = _rref_info(np.ascontiguousarray(sub.T), p)
    else:
        rowpiv = []
    return _Plan(piv, f, rowpiv)


def _solve_at(system: ParamSystem, plan: _Plan, point, p) -> list[int] | None:
    M = system.dense(point, p)
    n = len(plan.pivots)
    vec = [0] * system.ncols
    vec[plan.free_col] = 1
    if n == 0:
        return vec
    A = M[np.ix_(plan.rows, plan.pivots)]
    b = (-M[plan.rows, plan.free_col]) % p
    try:
        y = _to_nmod(A, p).solve(nmod_mat(n, 1, b.tolist(), p))
    except ZeroDivisionError:
        return None
    # the solution must satisfy all rows, not only the selected ones
    full = np.zeros(system.ncols, dtype=np.int64)
    full[plan.free_col] = 1
    for k, c in enumerate(plan.pivots):
        full[c] = int(y[k, 0])
    resid = M.dot(full % p) if False else _matvec_mod(M, full, p)
    if np.any(resid):
        return None
    for k, c in enumerate(plan.pivots):
        vec[c] = int(y[k, 0])
    return vec


def _matvec_mod(M: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    acc = np.zeros(M.shape[0], dtype=np.int64)
    nz = np.nonzero(v)[0]
    for c in nz:
        acc = (acc + M[:, c] * int(v[c])) % p
    return acc


# ---------------------------------------------------------------- univariate tools

def _poly_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _poly_trim(out)


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _poly_trim(out)


def _poly_divmod(a, b, p):
    a = list(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b) and a:
        c = a[-1] * inv % p
        d = len(a) - len(b)
        q[d] = c
        for i, y in enumerate(b):
            a[i + d] = (a[i + d] - c * y) % p
        _poly_trim(a)
    return _poly_trim(q), a


def _poly_eval(a, z, p):
    v = 0
    for c in reversed(a):
        v = (v * z + c) % p
    return v


def _interpolate(xs, ys, p):
    """Newton interpolation; coefficient list (low to high)."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * pow(xs[i] - xs[i - j], -1, p) % p
    poly = [coef[-1]]
    for i in range(n - 2, -1, -1):
        poly = _poly_mul(poly, [(-xs[i]) % p, 1], p) if poly else []
        if poly:
            poly[0] = (poly[0] + coef[i]) % p
        else:
            poly = [coef[i]] if coef[i] else []
        _poly_trim(poly)
    return _poly_trim(poly)


def _ratrecon_uni(xs, ys, p, check_xs, check_ys):
    """Smallest (num, den) degrees of a rational function through the points."""
    f = _interpolate(xs, ys, p)
    M = [1]
    for x in xs:
        M = _poly_mul(M, [(-x) % p, 1], p)
    r0, r1 = M, f
    t0, t1 = [], [1]
    best = None
    while True:
        if r1 is not None:
            nd = len(r1) - 1 if r1 else -1
            dd = len(t1) - 1
            if t1 and nd + dd < len(xs) - 1 + 0:
                ok = True
                for x, y in zip(check_xs, check_ys):
                    dv = _poly_eval(t1, x, p)
                    if dv == 0 or _poly_eval(r1, x, p) * pow(dv, -1, p) % p != y:
                        ok = False
                        break
                if ok and all(_poly_eval(t1, x, p) != 0 for x in xs):
                    cand = (max(nd, 0) if r1 else -1, dd)
                    if best is None or sum(cand) < sum(best):
                        best = cand
        if not r1:
            break
        q, rem = _poly_divmod(r0, r1, p)
        r0, r1 = r1, rem
        t0, t1 = t1, _poly_sub(t0, _poly_mul(q, t1, p), p)
        if not t1:
            break
    return best


# ---------------------------------------------------------------- multivariate

def _rat_recon_int(a: int, m: int):
    """Rational n/d ≡ a mod m with |n|, d < sqrt(m/2); None if none."""
    a %= m
    bound = int((m // 2) ** 0.5)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        s1, r1 = -s1, -r1
    from math import gcd
    if gcd(abs(r1), s1) != 1:
        return None
    return fmpq(r1, s1)


class _Recon:
    """Per-coordinate dense rational interpolation state."""

    def __init__(self, nexps, dexps):
        self.nexps = nexps
        self.dexps = dexps
        self.norm = None  # index into dexps fixed to 1
        self.residues: list = []  # list of (prime, ncoeffs, dcoeffs)


def kernel_vector(system: ParamSystem, first_target: int, *, seed: int = 0,
                  max_primes: int = 24, verify=None) -> list[RatFun] | None:
    """Canonical kernel vector with a nonzero coordinate at or after ``first_target``.

    Columns ``first_target..`` are the distinguished unknowns (telescoper
    coefficients). Returns None if no such vector exists at a random point.
    ``verify`` is an optional callback receiving the candidate vector; it
    returns True to accept.
    """
    rng = random.Random(seed)
    nparams = len(system.params)
    table = system.table
    p = PRIMES[0]

    def rpoint(pr):
        return [rng.randrange(1, pr) for _ in range(nparams)]

    base = rpoint(p)
    plan = _plan(system, first_target, base, p)
    if plan is None:
        return None
    log.debug("plan: %d pivots, free column %d", len(plan.pivots), plan.free_col)
    ncols = system.ncols
    unknown = [c for c in plan.pivots]  # the other coordinates are 0 or 1

    if nparams == 0:
        vec = _solve_at(system, plan, [], p)
        return _rational_constant_solution(system, plan, table, verify)

    # ---- degree detection along axis lines and one diagonal line
    def line_samples(direction, anchor, count, pr):
        xs, vals = [], []
        used = set()
        while len(xs) < count:
            tval = rng.randrange(1, pr)
            if tval in used:
                continue
            used.add(tval)
            pt = [(a + tval * d) % pr for a, d in zip(anchor, direction)]
            v = _solve_at(system, plan, pt, pr)
            if v is None:
                continue
            xs.append(tval)
            vals.append(v)
        return xs, vals

    def detect(direction):
        anchor = rpoint(p)
        count = 12
        while True:
            xs, vals = line_samples(direction, anchor, count + 3, p)
            degs = []
            ok = True
            for c in unknown:
                ys = [v[c] for v in vals]
                d = _ratrecon_uni(xs[:count], ys[:count], p, xs[count:], ys[count:])
                if d is None:
                    ok = False
                    break
                degs.append(d)
            if ok:
                return degs
            count *= 2
            if count > 400:
                raise InterpolationFailure("degree detection did not stabilise")

    axis_degs = []
    for j in range(nparams):
        direction = [1 if a == j else 0 for a in range(nparams)]
        axis_degs.append(detect(direction))
    total_degs = detect([rng.randrange(1, p) for _ in range(nparams)])
    recons = {}
    for n, c in enumerate(unknown):
        nb = [axis_degs[j][n][0] for j in range(nparams)]
        db = [axis_degs[j][n][1] for j in range(nparams)]
        tn, td = total_degs[n]
        if tn < 0:
            recons[c] = None  # identically zero
            continue
        nexps = [e for e in itertools.product(*[range(d + 1) for d in nb]) if sum(e) <= tn]
        dexps = [e for e in itertools.product(*[range(d + 1) for d in db]) if sum(e) <= td]
        recons[c] = _Recon(nexps, dexps)
    log.debug("max ansatz size %d", max((len(r.nexps) + len(r.dexps) for r in recons.values()
                                         if r), default=0))

    previous = None
    for pk, pr in enumerate(PRIMES[:max_primes]):
        if pk > 0:
            plan_ok = _solve_at(system, plan, rpoint(pr), pr)
            if plan_ok is None:
                # retry a few points before giving up on this prime
                for _ in range(5):
                    if _solve_at(system, plan, rpoint(pr), pr) is not None:
                        break
                else:
                    continue
        need = max((len(r.nexps) + len(r.dexps) for r in recons.values() if r), default=0) + 4
        pts, vals = [], []
        while len(pts) < need:
            pt = rpoint(pr)
            v = _solve_at(system, plan, pt, pr)
            if v is None:
                continue
            pts.append(pt)
            vals.append(v)
        P = np.array(pts, dtype=np.int64)
        maxd = 0
        for r in recons.values():
            if r:
                for e in r.nexps + r.dexps:
                    maxd = max(maxd, max(e) if e else 0)
        pw = np.ones((nparams, maxd + 1, len(pts)), dtype=np.int64)
        for j in range(nparams):
            for d in range(1, maxd + 1):
                pw[j, d] = pw[j, d - 1] * P[:, j] % pr
        ok_all = True
        for c, r in recons.items():
            if r is None:
                continue
            ys = np.array([v[c] for v in vals], dtype=np.int64)
            res = _fit(r, pw, ys, pr, nparams)
            if res is None:
                ok_all = False
                break
            r.residues.append((pr,) + res)
        if not ok_all:
            raise InterpolationFailure("dense rational fit failed (degree bounds too small?)")
        if pk == 0:
            # fix the sparsity pattern after the first prime
            for r in recons.values():
                if r is None:
                    continue
                _, nc, dc = r.residues[0]
                r.nexps = [e for e, v in zip(r.nexps, nc) if v]
                r.dexps = [e for e, v in zip(r.dexps, dc) if v]
                r.residues = [(pr, [v for v in nc if v], [v for v in dc if v])]
            continue
        cand = _reconstruct(recons, table, system.params)
        if cand is None:
            continue
        if previous is not None and cand == previous:
            vec = [RatFun.const(0, table) for _ in range(ncols)]
            vec[plan.free_col] = RatFun.const(1, table)
            for c, f in cand.items():
                vec[c] = f
            if verify is None or verify(vec):
                return vec
        previous = cand
    raise InterpolationFailure("rational reconstruction did not stabilise")


def _fit(r: _Recon, pw, ys, p, nparams):
    K = len(ys)
    nN, nD = len(r.nexps), len(r.dexps)

    def monos(exps):
        out = np.ones((K, len(exps)), dtype=np.int64)
        for a, e in enumerate(exps):
            col = np.ones(K, dtype=np.int64)
            for j in range(nparams):
                if e[j]:
                    col = col * pw[j, e[j]] % p
            out[:, a] = col
        return out

    MN = monos(r.nexps)
    MD = monos(r.dexps)
    A = np.concatenate([MN, (-(MD * ys[:, None] % p)) % p], axis=1)
    mat = _to_nmod(A, p)
    if r.norm is None:
        ns, nullity = mat.nullspace()
        if nullity != 1:
            return None
        vec = [int(ns[a, 0]) for a in range(nN + nD)]
        dpart = vec[nN:]
        nz = [a for a, v in enumerate(dpart) if v]
        if not nz:
            return None
        r.norm = r.dexps[nz[0]]
        inv = pow(dpart[nz[0]], -1, p)
        vec = [v * inv % p for v in vec]
        return vec[:nN], vec[nN:]
    # normalised: coefficient of r.norm in the denominator equals 1
    k = r.dexps.index(r.norm)
    cols = [a for a in range(nN + nD) if a != nN + k]
    rhs = (-A[:, nN + k]) % p
    sub = A[:, cols]
    # least-squares style: pick independent rows
    _, rowpiv = _rref_info(np.ascontiguousarray(sub.T), p)
    if len(rowpiv) < len(cols):
        return None
    try:
        y = _to_nmod(sub[rowpiv], p).solve(nmod_mat(len(rowpiv), 1, rhs[rowpiv].tolist(), p))
    except ZeroDivisionError:
        return None
    sol = [int(y[a, 0]) for a in range(len(cols))]
    full = sol[:nN + k] + [1] + sol[nN + k:]
    chk = _matvec_mod(A, np.array(full, dtype=np.int64), p)
    if np.any(chk):
        return None
    return full[:nN], full[nN:]


def _reconstruct(recons, table, params):
    out = {}
    pidx = [table.index(v) for v in params]
    for c, r in recons.items():
        if r is None:
            out[c] = RatFun.const(0, table)
            continue
        primes = [x[0] for x in r.residues]
        ncoef = []
        for a in range(len(r.nexps)):
            val = _crt([(x[1][a], x[0]) for x in r.residues])
            q = _rat_recon_int(*val)
            if q is None:
                return None
            ncoef.append(q)
        dcoef = []
        for a in range(len(r.dexps)):
            val = _crt([(x[2][a], x[0]) for x in r.residues])
            q = _rat_recon_int(*val)
            if q is None:
                return None
            dcoef.append(q)

        def build(exps, coefs):
            d = {}
            for e, cf in zip(exps, coefs):
                full = [0] * len(table)
                for j, v in zip(pidx, e):
                    full[j] = v
                d[tuple(full)] = cf
            return MPoly.from_terms(d, table)

        N = build(r.nexps, ncoef)
        D = build(r.dexps, dcoef)
        if D.is_zero():
            return None
        out[c] = RatFun(N, D)
    return out


def _crt(pairs):
    a, m = 0, 1
    for r, p in pairs:
        # x ≡ a mod m, x ≡ r mod p
        t = ((r - a) * pow(m, -1, p)) % p
        a = a + m * t
        m *= p
    return a, m


def _rational_constant_solution(system, plan, table, verify):
    """No parameters: solve exactly over Q."""
    from .linalg import nullspace_q

    M = [[fmpq(0)] * system.ncols for _ in range(system.nrows)]
    for idx in range(len(system.rows)):
        r, c = int(system.rows[idx]), int(system.cols[idx])
        s = int(system.starts[idx])
        e = int(system.starts[idx + 1]) if idx + 1 < len(system.starts) else len(system.mono_ids)
        M[r][c] = sum((fmpq(system._nums[t], system._dens[t]) for t in range(s, e)), fmpq(0))
    basis = nullspace_q(M, system.ncols)
    for vec in basis:
        if vec[plan.free_col] == 1 and all(vec[c] == 0 for c in range(plan.free_col + 1,
                                                                       system.ncols)
                                           if c not in plan.pivots):
            out = [RatFun.const(v, table) for v in vec]
            if verify is None or verify(out):
                return out
    return None
