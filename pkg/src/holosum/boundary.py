"""Turning a certificate identity into a recurrence for a bounded sum.

Summing ``P·t = Δ_k(Q·t)`` over an explicit range leaves boundary
evaluations of ``Q·t``. Poles of ``Q`` at the range ends force the range to
shrink, the removed points are added back, and the telescoper is moved
outside the sum even though the bounds depend on shifted parameters. Each
leftover is kept as a tagged term so the final relation can be audited.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from flint import fmpq

from .algebra import MPoly, PoleError, RatFun, format_ratfun
from .hyperterm import (
    COMBINATORIAL, LIMIT_ZERO, Binomial, GammaRatio, HyperTerm, Power, RatFactor, _linear,
    eval_term, shift_quotient,
)
from .ore import OreAlgebra, OrePoly
from .telescoping import BOUNDARY, INSIDE, UNDETERMINED, CTResult, scan_singularities

log = logging.getLogger(__name__)

__all__ = [
    "SumSpec", "TaggedTerm", "InhomRelation", "RelationError", "assemble_relation",
    "homogenize", "check_relation", "closed_form", "DELTA", "COMPENSATED", "COMP_SHIFT",
]

DELTA = "delta part"
COMPENSATED = "compensated term"
COMP_SHIFT = "comp S-shift"


class RelationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SumSpec:
    """``Σ_{var=lower}^{upper} summand`` with affine bounds."""

    var: str
    lower: MPoly
    upper: MPoly
    summand: HyperTerm

    @classmethod
    def make(cls, var: str, lower, upper, summand: HyperTerm) -> "SumSpec":
        table = summand.table
        return cls(var, _linear(lower, table) if not isinstance(lower, int) else table.const(lower),
                   _linear(upper, table) if not isinstance(upper, int) else table.const(upper),
                   summand)

    def bounds_at(self, point: Mapping[str, int]) -> tuple[int, int]:
        return int(self.lower.evaluate(point)), int(self.upper.evaluate(point))

    def evaluate(self, point: Mapping[str, int], convention: str = COMBINATORIAL) -> RatFun:
        lo, hi = self.bounds_at(point)
        return _signed_sum(lambda k: eval_term(self.summand, {**point, self.var: k},
                                               convention, LIMIT_ZERO), lo, hi,
                           self.summand.table)

    def text(self) -> str:
        return f"Sum({self.var}={self.lower}..{self.upper}) {self.summand}"


def _signed_sum(f, lo: int, hi: int, table) -> RatFun:
    """Σ_{k=lo}^{hi} with Σ_{a}^{b} = −Σ_{b+1}^{a−1} when b < a−1."""
    acc = RatFun.const(0, table)
    if hi >= lo:
        for k in range(lo, hi + 1):
            acc = acc + f(k)
    elif hi < lo - 1:
        for k in range(hi + 1, lo):
            acc = acc - f(k)
    return acc


@dataclass(frozen=True)
class TaggedTerm:
    """``coeff · term`` where the summation variable is fixed to ``at``."""

    tag: str
    coeff: RatFun
    term: HyperTerm
    note: str = ""

    def value(self, point: Mapping[str, int], convention: str = COMBINATORIAL) -> RatFun:
        c = self.coeff.subs({k: v for k, v in point.items() if k in self.coeff.variables()})
        if c.is_zero():
            return c
        return c * eval_term(self.term, point, convention, LIMIT_ZERO)

    def closed(self) -> RatFun | None:
        cf = closed_form(self.term)
        return None if cf is None else self.coeff * cf

    def text(self) -> str:
        cf = self.closed()
        if cf is not None:
            return f"{self.tag} [{self.note}]: {format_ratfun(cf)}"
        return f"{self.tag} [{self.note}]: ({format_ratfun(self.coeff)})*{self.term}"


def closed_form(t: HyperTerm) -> RatFun | None:
    """Rational function equal to ``t`` on the nonnegative parameter region.

    Works when every binomial has a constant bottom or a constant top−bottom,
    every power has a constant exponent, and no gamma ratio remains.
    """
    table = t.table
    out = RatFun.const(1, table)
    for f in t.factors:
        if isinstance(f, RatFactor):
            out = out * f.f
        elif isinstance(f, Power):
            if not f.exponent.is_constant():
                return None
            out = out * f.base ** int(f.exponent.constant_value())
        elif isinstance(f, Binomial):
            top = f.top
            if f.bottom.is_constant():
                c = int(f.bottom.constant_value())
            elif (top - f.bottom).is_constant():
                c = int((top - f.bottom).constant_value())
            else:
                return None
            if c < 0:
                return RatFun.const(0, table)
            val = RatFun.const(1, table)
            for j in range(c):
                val = val * RatFun.from_poly(top - j) / (j + 1)
            out = out * val
        elif isinstance(f, GammaRatio):
            if not f.arg.is_constant():
                return None
            u = int(f.arg.constant_value())
            if u <= 0:
                return RatFun.const(0, table)
        else:
            return None
    return out


@dataclass
class InhomRelation:
    """``P·Sum + Σ terms = 0`` on the declared validity region."""

    telescoper: OrePoly
    spec: SumSpec
    terms: list
    log: list = field(default_factory=list)
    range_used: tuple = ()
    certificate: RatFun | None = None

    def valid_at(self, point: Mapping[str, int]) -> bool:
        """No certificate evaluation used by the relation hits a pole at ``point``."""
        if self.certificate is None or not self.range_used:
            return True
        k = self.spec.var
        lo, hi = (int(b.evaluate(point)) for b in self.range_used)
        den = self.certificate.den
        bind = {v: point[v] for v in den.variables() if v in point and v != k}
        den = den.subs(bind)
        if k not in den.variables():
            return not den.is_zero()
        return all(not den.subs({k: j}).is_zero() for j in range(lo, hi + 2))

    def closed_rhs(self) -> RatFun | None:
        """Right-hand side of ``P·Sum = rhs`` when every term has a closed form."""
        total = RatFun.const(0, self.spec.summand.table)
        for tt in self.terms:
            c = tt.closed()
            if c is None:
                return None
            total = total - c
        return total

    def by_tag(self, tag: str) -> RatFun | None:
        total = RatFun.const(0, self.spec.summand.table)
        for tt in self.terms:
            if tt.tag != tag:
                continue
            c = tt.closed()
            if c is None:
                return None
            total = total + c
        return total

    def text(self) -> str:
        lines = [f"sum: {self.spec.text()}", f"telescoper: {self.telescoper}"]
        lines += self.log
        for tt in self.terms:
            lines.append("  " + tt.text())
        rhs = self.closed_rhs()
        if rhs is not None:
            lines.append(f"relation: ({self.telescoper})·Sum = {format_ratfun(rhs)}")
        return "\n".join(lines)

    def to_record(self) -> dict:
        return {
            "telescoper": self.telescoper.to_record(),
            "sum": {"var": self.spec.var, "lower": str(self.spec.lower),
                    "upper": str(self.spec.upper), "summand": str(self.spec.summand)},
            "terms": [{"tag": t.tag, "note": t.note, "coeff": format_ratfun(t.coeff),
                       "term": str(t.term)} for t in self.terms],
            "rhs": None if self.closed_rhs() is None else format_ratfun(self.closed_rhs()),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_record(), separators=(",", ":"))


def _shift_map(alg: OreAlgebra, e: tuple) -> dict:
    return {v: k for v, k in zip(alg.vars, e) if k}


def _shift_poly(p: MPoly, shifts: Mapping[str, int]) -> MPoly:
    for v, k in shifts.items():
        p = p.shift(v, k)
    return p


def _const_diff(a: MPoly, b: MPoly, what: str) -> int:
    d = a - b
    if not d.is_constant():
        raise RelationError(f"{what} is not a constant offset: {d}")
    c = d.constant_value()
    if c.q != 1:
        raise RelationError(f"{what} is not an integer offset: {c}")
    return int(c.p)


def _range_points(lo_off: int, hi_off: int):
    """Signed points of Σ_{base+lo_off}^{base+hi_off} relative to a base."""
    if hi_off >= lo_off:
        return [(j, 1) for j in range(lo_off, hi_off + 1)]
    if hi_off < lo_off - 1:
        return [(j, -1) for j in range(hi_off + 1, lo_off)]
    return []


def assemble_relation(spec: SumSpec, ct: CTResult) -> InhomRelation:
    """Inhomogeneous recurrence for ``spec`` from a verified certificate pair."""
    if not ct.verified:
        raise RelationError("certificate identity is not verified")
    k = spec.var
    t = spec.summand
    table = t.table
    P = ct.telescoper
    q = ct.certificates.get(k, RatFun.const(0, table))
    notes = []
    report = scan_singularities(ct, spec)
    inside = report.of_kind(INSIDE)
    if inside:
        raise RelationError("certificate poles strictly inside the range: "
                            + "; ".join(l.text() for l in inside))
    for loc in report.loci:
        notes.append(f"certificate pole: {loc.text()}")

    def pole_at(point: MPoly) -> bool:
        return q.den.compose({k: point}).is_zero()

    lo, hi = spec.lower, spec.upper
    up_cut = 0
    while pole_at(hi - up_cut + 1):
        up_cut += 1
        if up_cut > 50:
            raise RelationError("upper shrink did not terminate")
    lo_cut = 0
    while pole_at(lo + lo_cut):
        lo_cut += 1
        if lo_cut > 50:
            raise RelationError("lower shrink did not terminate")
    lo2, hi2 = lo + lo_cut, hi - up_cut
    if up_cut or lo_cut:
        notes.append(f"range shrunk to {k}={lo2}..{hi2}")
    terms: list[TaggedTerm] = []

    def at(term: HyperTerm, point: MPoly) -> HyperTerm:
        return term.substitute({k: point})

    # delta part: Σ_{lo2}^{hi2} P·t = Q·t|_{hi2+1} − Q·t|_{lo2}
    for point, sign in ((hi2 + 1, 1), (lo2, -1)):
        coef = q.compose({k: RatFun.from_poly(point)})
        terms.append(TaggedTerm(DELTA, -sign * coef, at(t, point), f"{k}={point}"))
    # compensated terms for the removed points
    removed = [hi2 + j for j in range(1, up_cut + 1)] + [lo + j for j in range(lo_cut)]
    for point in removed:
        for e in P.support():
            sh = _shift_map(P.alg, e)
            terms.append(TaggedTerm(COMPENSATED, -P.coefficient(e),
                                    at(t.shift_vector(sh), point), f"{k}={point}"))
    # comp S-shift: move P outside the sum with shifted bounds
    for e in P.support():
        sh = _shift_map(P.alg, e)
        if not sh:
            continue
        dhi = _const_diff(_shift_poly(hi, sh), hi, "upper bound shift")
        dlo = _const_diff(_shift_poly(lo, sh), lo, "lower bound shift")
        pts = [(hi + j, s) for j, s in _range_points(1, dhi)]
        pts += [(lo + j, s) for j, s in _range_points(dlo, -1)]
        for point, s in pts:
            terms.append(TaggedTerm(COMP_SHIFT, -s * P.coefficient(e),
                                    at(t.shift_vector(sh), point), f"{k}={point}, shift {e}"))
    rel = InhomRelation(P, spec, terms, notes, (lo2, hi2), q)
    if report.of_kind(UNDETERMINED):
        notes.append("relation holds where no certificate pole meets "
                     f"{k}={lo2}..{hi2 + 1}")
    for tag in (DELTA, COMPENSATED, COMP_SHIFT):
        val = rel.by_tag(tag)
        if val is not None and any(tt.tag == tag for tt in terms):
            rel.log.append(f"{tag} contribution to the right-hand side: {format_ratfun(-val)}")
    return rel


def check_relation(rel: InhomRelation, grid: Iterable[Mapping[str, int]],
                   convention: str = COMBINATORIAL, skipped: list | None = None) -> list:
    """Exact residuals of ``P·Sum + Σ terms`` at each grid point.

    Returns the list of ``(point, residual)`` with nonzero residual. Points
    outside the validity region are skipped and appended to ``skipped``.
    """
    P = rel.telescoper
    bad = []
    for point in grid:
        point = dict(point)
        if not rel.valid_at(point):
            if skipped is not None:
                skipped.append(point)
            continue
        res = RatFun.const(0, rel.spec.summand.table)
        for e in P.support():
            sh = _shift_map(P.alg, e)
            shifted = {v: point[v] + sh.get(v, 0) for v in point}
            c = P.coefficient(e).subs({v: point[v] for v in P.coefficient(e).variables()
                                       if v in point})
            res = res + c * rel.spec.evaluate(shifted, convention)
        for tt in rel.terms:
            res = res + tt.value(point, convention)
        if not res.is_zero():
            bad.append((point, res))
    return bad


# ----------------------------------------------------------------- homogenize

def _split_closed(tt: TaggedTerm):
    """(rational part, leftover factors key, leftover term) or None."""
    rat = tt.coeff
    rest = []
    table = tt.term.table
    for f in tt.term.factors:
        one = HyperTerm((f,), (), (), table)
        cf = closed_form(one)
        if cf is None:
            rest.append(f)
        else:
            rat = rat * cf
    key = tuple(sorted(f.text() for f in rest))
    return rat, key, HyperTerm(tuple(rest), (), (), table)


def homogenize(rel: InhomRelation, symbol: str | None = None, guess_fallback: bool = True,
               guess_range: Sequence[int] = (), fixed: Mapping[str, int] | None = None
               ) -> OrePoly:
    """``R·P`` with ``R`` annihilating the inhomogeneous part."""
    P = rel.telescoper
    alg = P.alg
    if symbol is None:
        if len(alg.vars) != 1:
            raise ValueError("homogenize needs the shift symbol for several shifts")
        symbol = alg.symbols[0]
    v = alg.var_of(symbol)
    table = alg.table
    groups: dict = {}
    ok = True
    for tt in rel.terms:
        try:
            rat, key, rest = _split_closed(tt)
        except (ValueError, ZeroDivisionError):
            ok = False
            break
        if key in groups:
            groups[key] = (groups[key][0] + rat, rest)
        else:
            groups[key] = (rat, rest)
    if ok:
        anns = []
        for rat, rest in groups.values():
            if rat.is_zero():
                continue
            quot = rat.shift(v) / rat * shift_quotient(rest, v)
            R = OrePoly(alg, {_unit(alg, symbol, 1): RatFun.from_poly(quot.den),
                              _unit(alg, symbol, 0): RatFun.from_poly(-quot.num)})
            anns.append(R.normalize())
        if not anns:
            return P.normalize()
        R = anns[0]
        for other in anns[1:]:
            if R != other:
                R = R.lclm(other, symbol)
        rel.log.append(f"annihilator of the inhomogeneous part: {R}")
        return (R * P).normalize()
    if not guess_fallback:
        raise RelationError("inhomogeneous part not recognised and guessing is disabled")
    from .guessing import GuessProblem, guess_recurrence
    fixed = dict(fixed or {})
    data = {}
    for n in guess_range:
        pt = {**fixed, v: n}
        val = RatFun.const(0, table)
        for tt in rel.terms:
            val = val + tt.value(pt)
        data[(n,)] = val
    prob = GuessProblem.auto(data, (v,), symbol, table)
    R = guess_recurrence(prob)
    if R is None:
        raise RelationError("guessing found no annihilator for the inhomogeneous part")
    R = OrePoly(alg, {_unit(alg, symbol, e[0]): c for e, c in R.terms.items()})
    rel.log.append(f"guessed annihilator of the inhomogeneous part (semi-rigorous): {R}")
    return (R * P).normalize()


def _unit(alg: OreAlgebra, symbol: str, k: int) -> tuple:
    p = alg.position(symbol)
    return tuple(k if j == p else 0 for j in range(len(alg.vars)))
