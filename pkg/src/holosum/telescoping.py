"""Creative telescoping: Gosper, Zeilberger and a multisum certificate ansatz.

A result ``(P, {v: q_v})`` certifies ``P·t = Σ_v Δ_v(q_v·t)`` where
``Δ_v g = g(v+1) − g``. Every result is checked as a rational identity
before it is returned.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from flint import fmpq, fmpq_mat

from .algebra import MPoly, RatFun, VarTable, format_ratfun, parse_ratfun
from .hyperterm import GammaRatio, HyperTerm, EPS, _lin_coeff, shift_quotient, shift_ratio
from .interp import InterpolationFailure, ParamSystem, kernel_vector
from .linalg import solve_linear
from .ore import OreAlgebra, OrePoly

log = logging.getLogger(__name__)

__all__ = [
    "CTResult", "CTFailure", "verify_ct", "gosper", "zeilberger", "multisum_ct",
    "scan_singularities", "SingularityReport", "Locus", "certificate_assignments",
    "Attempt", "PROFILES",
]

PROFILES = ("plain", "gamma", "cross")
SMALL_SYSTEM = 40


class CTFailure(ArithmeticError):
    """No telescoper within the search budget."""

    def __init__(self, msg, attempts=()):
        super().__init__(msg)
        self.attempts = list(attempts)


@dataclass(frozen=True)
class Attempt:
    support: tuple
    degree: int
    profile: str
    feasible: bool


@dataclass
class CTResult:
    telescoper: OrePoly
    certificates: dict
    residual: RatFun
    attempts: list = field(default_factory=list)
    anchor: tuple | None = None

    @property
    def verified(self) -> bool:
        return self.residual.is_zero()

    def to_record(self) -> dict:
        return {
            "telescoper": self.telescoper.to_record(),
            "certificates": {v: format_ratfun(q) for v, q in self.certificates.items()},
            "residual": format_ratfun(self.residual),
            "anchor": None if self.anchor is None else list(self.anchor),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_record(), separators=(",", ":"))

    @classmethod
    def from_record(cls, rec: dict) -> "CTResult":
        P = OrePoly.from_record(rec["telescoper"])
        table = P.alg.table
        certs = {v: parse_ratfun(txt, table) for v, txt in rec["certificates"].items()}
        anchor = rec.get("anchor")
        return cls(P, certs, parse_ratfun(rec["residual"], table),
                   anchor=None if anchor is None else tuple(anchor))

    @classmethod
    def loads(cls, text: str) -> "CTResult":
        return cls.from_record(json.loads(text))

    def text(self) -> str:
        lines = [f"telescoper: {self.telescoper}"]
        for v, q in self.certificates.items():
            lines.append(f"certificate[{v}]: {format_ratfun(q)}")
        lines.append(f"residual: {format_ratfun(self.residual)}")
        return "\n".join(lines)


def _exponent_shifts(alg: OreAlgebra, e: tuple) -> dict:
    return {v: k for v, k in zip(alg.vars, e) if k}


def verify_ct(t: HyperTerm, result: CTResult) -> RatFun:
    """Residual ``P·t/t − Σ_v [σ_v(q_v)·t(v+1)/t − q_v]``; zero iff valid."""
    table = t.table
    P = result.telescoper
    res = RatFun.const(0, table)
    for e in P.support():
        res = res + P.coefficient(e) * shift_ratio(t, _exponent_shifts(P.alg, e))
    for v, q in result.certificates.items():
        res = res - (q.shift(v) * shift_quotient(t, v) - q)
    return res


# ----------------------------------------------------------------- Gosper

def _linear_dispersions(a: MPoly, b: MPoly, v: str) -> list[int]:
    """Nonnegative integers h with gcd(a(v), b(v+h)) nontrivial."""
    out = set()
    fa = [f for f, _ in a.factor()[1]] if not a.is_constant() else []
    fb = [g for g, _ in b.factor()[1]] if not b.is_constant() else []
    for f in fa:
        df = f.degree(v)
        if df <= 0:
            continue
        cf = f.coefficients_in(v)
        for g in fb:
            if g.degree(v) != df:
                continue
            cg = g.coefficients_in(v)
            # g(v+h) = lc·v^d + (d·h·lc + c_{d-1})·v^{d-1} + ...; match ratio with f
            ratio = RatFun(cf[df], cg[df])
            sub_f = RatFun.from_poly(cf.get(df - 1, a.table.zero()))
            sub_g = RatFun.from_poly(cg.get(df - 1, a.table.zero()))
            lcg = RatFun.from_poly(cg[df])
            h = (sub_f / ratio - sub_g) / (lcg * df)
            if not h.is_constant():
                continue
            hv = h.constant_value()
            if hv.q != 1 or hv < 0:
                continue
            hv = int(hv.p)
            if (RatFun.from_poly(g.shift(v, hv)) * ratio - RatFun.from_poly(f)).is_zero():
                out.add(hv)
    return sorted(out)


def gosper(t, v: str, table: VarTable | None = None) -> RatFun | None:
    """Rational q with Δ_v(q·t) = t, or None when t is not Gosper-summable.

    ``t`` is a HyperTerm or directly its v-shift quotient as a RatFun (terms
    like k! have no HyperTerm form but do have a rational quotient).
    """
    ratio = shift_quotient(t, v) if isinstance(t, HyperTerm) else t
    table = ratio.table
    a, b = ratio.num, ratio.den
    p = table.one()
    for h in _linear_dispersions(a, b, v):
        g = a.gcd(b.shift(v, h))
        if g.is_constant():
            continue
        a = a.exact_div(g)
        b = b.exact_div(g.shift(v, -h))
        for j in range(1, h + 1):
            p = p * g.shift(v, -j)
    A = a
    B = b.shift(v, -1)
    # A(v)·x(v+1) − B(v)·x(v) = p(v)
    plus = A + B
    minus = A - B
    dp = p.degree(v)
    dplus = plus.degree(v) if not plus.is_zero() else -1
    dminus = minus.degree(v) if not minus.is_zero() else -1
    if dminus >= dplus:
        bound = dp - dminus
    else:
        bound = dp - dplus + 1
        L = plus.coefficients_in(v)[dplus]
        ell = minus.coefficients_in(v).get(dplus - 1, table.zero())
        cand = RatFun(-2 * ell, L)
        if cand.is_constant():
            c = cand.constant_value()
            if c.q == 1 and c >= 0:
                bound = max(bound, int(c.p))
    if bound < 0:
        return None
    xv = table.var(v)
    cols = []
    for j in range(bound + 1):
        mono = xv ** j
        cols.append(A * mono.shift(v) - B * mono)
    rows = _coeff_rows(cols + [p], v)
    system = [row[:-1] for row in rows]
    rhs = [row[-1] for row in rows]
    sol = solve_linear(system, rhs, table=table)
    if not sol.consistent:
        return None
    x = RatFun.const(0, table)
    for j, c in enumerate(sol.particular):
        x = x + c * RatFun.from_poly(xv ** j)
    q = RatFun.from_poly(B) * x / RatFun.from_poly(p)
    if not (q.shift(v) * ratio - q - 1).is_zero():
        return None
    return q


def _coeff_rows(polys: Sequence[MPoly], v: str) -> list[list[RatFun]]:
    """Rows indexed by powers of v, columns by the given polynomials."""
    coeffs = [p.coefficients_in(v) for p in polys]
    degs = sorted({d for c in coeffs for d in c})
    table = polys[0].table
    rows = []
    for d in degs:
        rows.append([RatFun.from_poly(c.get(d, table.zero())) for c in coeffs])
    return rows


# ----------------------------------------------------------------- ansatz

def _gamma_profile(T: HyperTerm, sumvars) -> dict:
    """Certificate denominators that cancel gamma-ratio poles.

    For each gamma factor and each summation variable v it depends on, the
    denominator of q_v receives the eps-shifted factors appearing in the
    quotients of variables whose coefficient has the opposite sign.
    """
    table = T.table
    eps = table.var(EPS)
    out = {v: [] for v in sumvars}
    for f in T.factors:
        if not isinstance(f, GammaRatio):
            continue
        u = f.arg
        coeff = {w: _lin_coeff(u, w) for w in sumvars}
        for v in sumvars:
            cv = coeff[v]
            if cv == 0:
                continue
            for w in sumvars:
                cw = coeff[w]
                if cw == 0 or (cw > 0) == (cv > 0):
                    continue
                if cw > 0:
                    facs = [u + (j + eps) for j in range(cw)]
                else:
                    facs = [u + (j + eps) for j in range(cw, 0)]
                for g in facs:
                    if g not in out[v]:
                        out[v].append(g)
    return {v: _prod(fs, table) for v, fs in out.items()}


def _cross_profile(taus: dict, sumvars) -> dict:
    out = {}
    for v in sumvars:
        facs = []
        for w in sumvars:
            if w == v:
                continue
            den = taus[w].den
            if den.is_constant():
                continue
            for g, mult in den.factor()[1]:
                if g.variables() & set(sumvars) and g not in facs:
                    facs.append(g)
        out[v] = _prod(facs, taus[v].table)
    return out


def _prod(fs, table) -> MPoly:
    out = table.one()
    for f in fs:
        out = out * f
    return out


def _monomials(nvars: int, degree: int):
    out = []
    for d in range(degree + 1):
        for e in itertools.product(range(d + 1), repeat=nvars):
            if sum(e) == d:
                out.append(e)
    return out


class _Ansatz:
    """Certificate ansatz for a fixed telescoper support, degree and profile."""

    def __init__(self, t: HyperTerm, sumvars, alg: OreAlgebra, support, degree: int,
                 dens: dict, subs: Mapping | None = None):
        table = t.table
        self.t = t
        self.sumvars = list(sumvars)
        self.alg = alg
        self.support = list(support)
        self.degree = degree
        nv = len(alg.vars)
        self.anchor = tuple(max(e[j] for e in support) for j in range(nv))
        anchor_shift = _exponent_shifts(alg, self.anchor)
        T = t.shift_vector(anchor_shift)
        base = shift_ratio(t, anchor_shift)
        self.anchor_ratio = base
        ratios = [shift_ratio(t, _exponent_shifts(alg, e)) / base for e in self.support]
        taus = {v: shift_quotient(T, v) for v in self.sumvars}
        self.dens = {v: dens[v] for v in self.sumvars}

        def sub(f):
            return f.subs(subs) if subs else f

        ratios = [sub(r) for r in ratios]
        A = {v: sub(taus[v] / RatFun.from_poly(self.dens[v].shift(v))) for v in self.sumvars}
        B = {v: sub(RatFun.const(1, table) / RatFun.from_poly(self.dens[v]))
             for v in self.sumvars}
        L = table.one()
        for f in ratios + list(A.values()) + list(B.values()):
            L = L * f.den.exact_div(L.gcd(f.den))
        LA = {v: A[v].num * L.exact_div(A[v].den) for v in self.sumvars}
        LB = {v: B[v].num * L.exact_div(B[v].den) for v in self.sumvars}
        monos = _monomials(len(self.sumvars), degree)
        sv = [table.var(v) for v in self.sumvars]
        self.columns = []  # labels
        polys = []
        for v in self.sumvars:
            for e in monos:
                mu = table.one()
                for g, k in zip(sv, e):
                    mu = mu * g ** k
                self.columns.append(("cert", v, e))
                polys.append(mu * LB[v] - mu.shift(v) * LA[v])
        self.first_p = len(self.columns)
        for e, r in zip(self.support, ratios):
            self.columns.append(("p", e))
            polys.append(r.num * L.exact_div(r.den))
        self.polys = polys
        self.table = table

    def split(self):
        """Entries keyed by (row, column) with parameter-only term lists."""
        table = self.table
        sidx = [table.index(v) for v in self.sumvars]
        rows: dict = {}
        entries: dict = {}
        params = set()
        for c, poly in enumerate(self.polys):
            for e, coef in poly.terms():
                rkey = tuple(e[j] for j in sidx)
                pe = list(e)
                for j in sidx:
                    pe[j] = 0
                r = rows.setdefault(rkey, len(rows))
                entries.setdefault((r, c), []).append((tuple(pe), coef))
                for j, k in enumerate(pe):
                    if k:
                        params.add(table.names[j])
        return entries, len(rows), sorted(params, key=table.index)

    def numeric_feasible(self) -> bool:
        entries, nrows, _ = self.split()
        ncols = len(self.columns)
        if nrows == 0:
            return True
        A = fmpq_mat(nrows, ncols)
        for (r, c), terms in entries.items():
            A[r, c] = sum((coef for _, coef in terms), fmpq(0))
        R, rank = A.rref()
        piv = set()
        row = 0
        for c in range(ncols):
            if row < rank and R[row, c] != 0:
                piv.add(c)
                row += 1
        return any(c not in piv for c in range(self.first_p, ncols))

    def result_from(self, vec) -> CTResult:
        table = self.table
        terms = {}
        nums = {v: RatFun.const(0, table) for v in self.sumvars}
        for label, c in zip(self.columns, vec):
            if c.is_zero():
                continue
            if label[0] == "p":
                terms[label[1]] = c
            else:
                _, v, e = label
                mu = table.one()
                for w, k in zip(self.sumvars, e):
                    mu = mu * table.var(w) ** k
                nums[v] = nums[v] + c * RatFun.from_poly(mu)
        P = OrePoly(self.alg, terms)
        certs = {v: nums[v] / RatFun.from_poly(self.dens[v]) * self.anchor_ratio
                 for v in self.sumvars}
        return CTResult(P, certs, RatFun.const(0, table), anchor=self.anchor)


def _supports(alg: OreAlgebra, order: int):
    nv = len(alg.vars)
    seen = []
    for j in range(nv):
        sup = [tuple(k if a == j else 0 for a in range(nv)) for k in range(order + 1)]
        seen.append(tuple(sup))
    if nv > 1:
        full = tuple(e for d in range(order + 1) for e in itertools.product(range(d + 1), repeat=nv)
                     if sum(e) == d)
        seen.append(full)
    out = []
    for s in seen:
        if s not in out:
            out.append(s)
    return out


def _profiles(t: HyperTerm, sumvars, alg, support, which) -> dict:
    table = t.table
    nv = len(alg.vars)
    anchor = tuple(max(e[j] for e in support) for j in range(nv))
    T = t.shift_vector(_exponent_shifts(alg, anchor))
    out = {}
    for name in which:
        if name == "plain":
            out[name] = {v: table.one() for v in sumvars}
        elif name == "gamma":
            if T.has_gamma():
                out[name] = _gamma_profile(T, sumvars)
        elif name == "cross":
            if len(sumvars) > 1:
                taus = {v: shift_quotient(T, v) for v in sumvars}
                out[name] = _cross_profile(taus, sumvars)
        else:
            raise ValueError(f"unknown denominator profile {name!r}")
    return out


def _random_point(params, rng) -> dict:
    return {p: fmpq(rng.randrange(3, 10**6), rng.randrange(1, 10**3)) for p in params}


def _solve_symbolic(ans: _Ansatz, seed: int) -> CTResult | None:
    entries, nrows, params = ans.split()
    ncols = len(ans.columns)
    table = ans.table
    if ncols <= SMALL_SYSTEM:
        system = [[table.zero() for _ in range(ncols)] for _ in range(nrows)]
        for (r, c), terms in entries.items():
            system[r][c] = MPoly.from_terms(dict(_merge(terms)), table)
        if nrows:
            sol = solve_linear(system, None, table=table)
            basis, free = sol.nullspace, sol.free_columns
        else:
            free = list(range(ncols))
            basis = [[RatFun.const(int(a == b), table) for a in range(ncols)] for b in free]
        for vec, f in zip(basis, free):
            if f < ans.first_p:
                continue
            res = ans.result_from(vec)
            res.residual = verify_ct(ans.t, res)
            return res if res.verified else None
        return None
    system = ParamSystem({k: _merge(v) for k, v in entries.items()}, nrows, ncols, params,
                         table)

    def check(vec):
        res = ans.result_from(vec)
        res.residual = verify_ct(ans.t, res)
        check.result = res
        return res.verified

    check.result = None
    vec = kernel_vector(system, ans.first_p, seed=seed, verify=check)
    if vec is None:
        return None
    return check.result


def _merge(terms):
    acc: dict = {}
    for e, c in terms:
        acc[e] = acc.get(e, fmpq(0)) + c
    return [(e, c) for e, c in acc.items() if c != 0]


def multisum_ct(t: HyperTerm, sumvars: Sequence[str], telescoper_shifts: Sequence[str],
                max_order: int = 3, degree_budget: int = 6, profiles=PROFILES,
                seed: int = 0, min_order: int = 1) -> CTResult:
    """Telescoper in the given shifts plus one certificate per summation variable.

    Escalates telescoper support by graded order, then certificate numerator
    degree, then denominator profile. Feasibility is decided at a random
    rational parameter point; the parametric solution is then computed and
    verified as a rational identity.
    """
    sumvars = list(sumvars)
    alg = OreAlgebra(list(telescoper_shifts), t.table)
    rng = random.Random(seed)
    params = sorted(t.variables() - set(sumvars), key=t.table.index)
    point = _random_point(params, rng)
    attempts: list[Attempt] = []
    for order in range(max(min_order, 1), max_order + 1):
        for support in _supports(alg, order):
            if order > 1 and all(sum(e) < order for e in support):
                continue
            profs = _profiles(t, sumvars, alg, support, profiles)
            for d in range(degree_budget + 1):
                for name, dens in profs.items():
                    num = _Ansatz(t, sumvars, alg, support, d, dens, subs=point)
                    ok = num.numeric_feasible()
                    attempts.append(Attempt(support, d, name, ok))
                    log.info("support %s degree %d profile %s: %s", support, d, name,
                             "feasible" if ok else "infeasible")
                    if not ok:
                        continue
                    ans = _Ansatz(t, sumvars, alg, support, d, dens)
                    try:
                        res = _solve_symbolic(ans, seed)
                    except InterpolationFailure as exc:
                        log.warning("interpolation failed: %s", exc)
                        res = None
                    if res is not None:
                        res = _normalized(t, res)
                        res.attempts = attempts
                        return res
    raise CTFailure(f"no telescoper up to order {max_order} and degree {degree_budget}",
                    attempts)


def _normalized(t: HyperTerm, res: CTResult) -> CTResult:
    """Normalise the telescoper and rescale the certificates to match."""
    raw = res.telescoper
    P = raw.normalize()
    e0 = P.support()[0]
    scale = P.coefficient(e0) / raw.coefficient(e0)
    out = CTResult(P, {v: q * scale for v, q in res.certificates.items()},
                   RatFun.const(0, t.table), anchor=res.anchor)
    out.residual = verify_ct(t, out)
    if not out.verified:
        raise AssertionError("rescaled certificates failed verification")
    return out


def zeilberger(t: HyperTerm, sumvar: str, telescoper_shifts: Sequence[str],
               max_order: int = 3, degree_budget: int = 6, seed: int = 0) -> CTResult:
    """Single-sum creative telescoping (the one-variable case of the ansatz)."""
    return multisum_ct(t, [sumvar], telescoper_shifts, max_order, degree_budget,
                       profiles=("plain",), seed=seed)


# ----------------------------------------------------------------- singularities

INSIDE = "inside"
BOUNDARY = "boundary"
OUTSIDE = "outside"
UNDETERMINED = "undetermined"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class Locus:
    certificate: str
    factor: str
    locus: str | None
    kind: str

    def text(self) -> str:
        if self.locus is None:
            return f"{self.kind} factor {self.factor} in certificate[{self.certificate}]"
        return (f"{self.kind} singularity at {self.certificate_var}={self.locus} "
                f"(factor {self.factor})")

    @property
    def certificate_var(self) -> str:
        return self.certificate


@dataclass
class SingularityReport:
    var: str
    loci: list

    def of_kind(self, kind: str) -> list:
        return [l for l in self.loci if l.kind == kind]

    def __bool__(self):
        return bool(self.loci)

    def text(self) -> str:
        if not self.loci:
            return "no singularities"
        return "\n".join(l.text() for l in self.loci)


def _classify(locus: MPoly, lo: MPoly, hi: MPoly) -> str:
    up = locus - (hi + 1)
    down = locus - lo
    if up.is_zero() or down.is_zero():
        return BOUNDARY
    if up.is_constant() and down.is_constant():
        u, d = up.constant_value(), down.constant_value()
        return INSIDE if d > 0 and u < 0 else OUTSIDE
    if down.is_constant() and down.constant_value() < 0:
        return OUTSIDE
    if up.is_constant() and up.constant_value() > 0:
        return OUTSIDE
    return UNDETERMINED


def scan_singularities(result: CTResult, spec) -> SingularityReport:
    """Classify the poles of the certificate of ``spec.var`` against its range.

    ``spec`` needs ``var``, ``lower`` and ``upper`` (affine MPoly bounds).
    The telescoped sum evaluates the certificate at ``lower`` and ``upper+1``;
    poles there are boundary singularities.
    """
    v = spec.var
    loci = []
    q = result.certificates.get(v)
    if q is None or q.den.is_constant():
        return SingularityReport(v, loci)
    table = q.table
    for g, _ in q.den.factor()[1]:
        dv = g.degree(v)
        if dv <= 0:
            continue
        if dv > 1:
            loci.append(Locus(v, str(g), None, UNRESOLVED))
            continue
        cs = g.coefficients_in(v)
        a = cs[1]
        if not a.is_constant() or abs(a.constant_value()) != 1:
            loci.append(Locus(v, str(g), None, UNRESOLVED))
            continue
        rest = cs.get(0, table.zero())
        locus = -rest if a.constant_value() == 1 else rest
        loci.append(Locus(v, str(g), str(locus), _classify(locus, spec.lower, spec.upper)))
    return SingularityReport(v, loci)


def certificate_assignments(t: HyperTerm, telescoper: OrePoly, certificates: Sequence[RatFun],
                            sumvars: Sequence[str]) -> list[tuple[dict, bool]]:
    """Try every assignment of unlabelled certificates to summation variables."""
    out = []
    for perm in itertools.permutations(sumvars):
        certs = dict(zip(perm, certificates))
        res = CTResult(telescoper, certs, RatFun.const(0, t.table))
        out.append((certs, verify_ct(t, res).is_zero()))
    return out
