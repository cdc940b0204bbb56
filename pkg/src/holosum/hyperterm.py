"""Symbolic hypergeometric terms.

A term is a product of binomial coefficients, powers, rational factors and
perturbed gamma ratios ``Γ(u+eps)/Γ(u)`` whose arguments are integer-linear
forms. Shift quotients are rational by construction, and terms can be
evaluated exactly at integer points under either binomial convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from flint import fmpq

from .algebra import MPoly, ParseError, PoleError, RatFun, VarTable, default_table, parse_ratfun
from .ore import OreAlgebra, OrePoly

__all__ = [
    "Binomial", "Power", "RatFactor", "GammaRatio", "HyperTerm",
    "COMBINATORIAL", "EXTENDED", "SYMBOLIC", "LIMIT_ZERO",
    "shift_quotient", "eval_term", "annihilator_of_term", "support_box", "SupportBox",
    "parse_term", "ext_binomial", "comb_binomial", "NonlinearError", "TermEvaluator",
]

COMBINATORIAL = "combinatorial"
EXTENDED = "extended"
SYMBOLIC = "symbolic"
LIMIT_ZERO = "limit_zero"
EPS = "eps"


class NonlinearError(ValueError):
    pass


# ----------------------------------------------------------------- linear forms

def _linear(p, table: VarTable) -> MPoly:
    if isinstance(p, RatFun):
        if not p.is_polynomial():
            raise NonlinearError(f"argument {p} is not a linear form")
        p = p.num
    elif isinstance(p, int):
        p = table.const(p)
    elif isinstance(p, str):
        return _linear(parse_ratfun(p, table), table)
    if p.total_degree() > 1:
        raise NonlinearError(f"argument {p} is not linear")
    for _, c in p.terms():
        if c.q != 1:
            raise NonlinearError(f"argument {p} has non-integer coefficients")
    return p


def _lin_coeff(p: MPoly, var: str) -> int:
    idx = p.table.index(var)
    for e, c in p.terms():
        if e[idx] == 1:
            return int(c.p)
    return 0


def _lin_value(p: MPoly, point: Mapping[str, object]) -> int:
    v = p.evaluate(point)
    if v.q != 1:
        raise ValueError(f"linear form {p} is not integral at {dict(point)}")
    return int(v.p)


def _rising(z: RatFun, h: int) -> RatFun:
    """Γ(z+h)/Γ(z) as a rational function, any integer h."""
    out = RatFun.const(1, z.table)
    if h >= 0:
        for j in range(h):
            out = out * (z + j)
    else:
        for j in range(1, -h + 1):
            out = out / (z - j)
    return out


# ----------------------------------------------------------------- factors

@dataclass(frozen=True)
class Binomial:
    top: MPoly
    bottom: MPoly

    def quotient(self, var: str, by: int = 1) -> RatFun:
        a = RatFun.from_poly(self.top)
        b = RatFun.from_poly(self.bottom)
        ha = _lin_coeff(self.top, var) * by
        hb = _lin_coeff(self.bottom, var) * by
        if ha == 0 and hb == 0:
            return RatFun.const(1, a.table)
        return _rising(a + 1, ha) / (_rising(b + 1, hb) * _rising(a - b + 1, ha - hb))

    def substitute(self, mapping) -> "Binomial":
        return Binomial(_linear(self.top.compose(mapping), self.top.table),
                        _linear(self.bottom.compose(mapping), self.top.table))

    def text(self) -> str:
        return f"Binomial({self.top}, {self.bottom})"

    def variables(self) -> set:
        return self.top.variables() | self.bottom.variables()


@dataclass(frozen=True)
class Power:
    base: RatFun
    exponent: MPoly

    def quotient(self, var: str, by: int = 1) -> RatFun:
        c = _lin_coeff(self.exponent, var) * by
        return self.base ** c if c else RatFun.const(1, self.base.table)

    def substitute(self, mapping) -> "Power":
        return Power(self.base.compose(mapping) if mapping else self.base,
                     _linear(self.exponent.compose(mapping), self.exponent.table))

    def text(self) -> str:
        return f"Pow({self.base}, {self.exponent})"

    def variables(self) -> set:
        return self.base.variables() | self.exponent.variables()


@dataclass(frozen=True)
class RatFactor:
    f: RatFun

    def quotient(self, var: str, by: int = 1) -> RatFun:
        return self.f.shift(var, by) / self.f

    def substitute(self, mapping) -> "RatFactor":
        return RatFactor(self.f.compose(mapping))

    def text(self) -> str:
        if self.f.is_polynomial():
            return f"Rat({self.f.num}, 1)"
        return f"Rat({self.f.num}, {self.f.den})"

    def variables(self) -> set:
        return self.f.variables()


@dataclass(frozen=True)
class GammaRatio:
    """Γ(arg+eps)/Γ(arg)."""

    arg: MPoly

    def quotient(self, var: str, by: int = 1) -> RatFun:
        h = _lin_coeff(self.arg, var) * by
        table = self.arg.table
        if h == 0:
            return RatFun.const(1, table)
        u = RatFun.from_poly(self.arg)
        return _rising(u + RatFun.from_poly(table.var(EPS)), h) / _rising(u, h)

    def substitute(self, mapping) -> "GammaRatio":
        return GammaRatio(_linear(self.arg.compose(mapping), self.arg.table))

    def text(self) -> str:
        return f"GammaRatio({self.arg})"

    def variables(self) -> set:
        return self.arg.variables() | {EPS}


Factor = Binomial | Power | RatFactor | GammaRatio


@dataclass(frozen=True)
class HyperTerm:
    factors: tuple
    sumvars: tuple = ()
    params: tuple = ()
    table: VarTable = field(default_factory=default_table, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "sumvars", tuple(self.sumvars))
        object.__setattr__(self, "params", tuple(self.params))

    @classmethod
    def build(cls, factors: Iterable, sumvars=(), params=(), table=None) -> "HyperTerm":
        table = table or default_table()
        return cls(tuple(factors), tuple(sumvars), tuple(params), table)

    def __str__(self):
        if len(self.factors) == 1:
            return self.factors[0].text()
        return "Mul(" + ", ".join(f.text() for f in self.factors) + ")"

    def variables(self) -> set:
        out = set()
        for f in self.factors:
            out |= f.variables()
        return out

    def with_vars(self, sumvars=None, params=None) -> "HyperTerm":
        return HyperTerm(self.factors, self.sumvars if sumvars is None else tuple(sumvars),
                         self.params if params is None else tuple(params), self.table)

    def times(self, other) -> "HyperTerm":
        if isinstance(other, HyperTerm):
            fs = self.factors + other.factors
        elif isinstance(other, (Binomial, Power, RatFactor, GammaRatio)):
            fs = self.factors + (other,)
        else:
            f = other if isinstance(other, RatFun) else RatFun.const(other, self.table)
            fs = self.factors + (RatFactor(f),)
        return HyperTerm(fs, self.sumvars, self.params, self.table)

    def substitute(self, mapping: Mapping[str, object]) -> "HyperTerm":
        """Integer-linear substitution of variables."""
        m = {}
        for k, v in mapping.items():
            if isinstance(v, int):
                v = self.table.const(v)
            elif isinstance(v, str):
                v = _linear(v, self.table)
            elif isinstance(v, RatFun):
                v = _linear(v, self.table)
            m[k] = v
        fs = tuple(f.substitute(m) for f in self.factors)
        return HyperTerm(fs, tuple(v for v in self.sumvars if v not in m),
                         self.params, self.table)

    def shift(self, var: str, by: int = 1) -> "HyperTerm":
        return self.substitute({var: self.table.var(var) + by})

    def shift_vector(self, shifts: Mapping[str, int]) -> "HyperTerm":
        m = {v: self.table.var(v) + k for v, k in shifts.items() if k}
        return self.substitute(m) if m else self

    def has_gamma(self) -> bool:
        return any(isinstance(f, GammaRatio) for f in self.factors)

    def without_gamma(self) -> "HyperTerm":
        return HyperTerm(tuple(f for f in self.factors if not isinstance(f, GammaRatio)),
                         self.sumvars, self.params, self.table)


# ----------------------------------------------------------------- shift quotients

def shift_quotient(t: HyperTerm, v: str, by: int = 1) -> RatFun:
    """T(v -> v+by) / T as a reduced rational function."""
    q = RatFun.const(1, t.table)
    for f in t.factors:
        q = q * f.quotient(v, by)
    return q


def shift_ratio(t: HyperTerm, shifts: Mapping[str, int]) -> RatFun:
    """T(shifted by a vector) / T, built from successive single-variable quotients."""
    q = RatFun.const(1, t.table)
    cur = t
    for v, k in shifts.items():
        if not k:
            continue
        q = q * shift_quotient(cur, v, k)
        cur = cur.shift(v, k)
    return q


def annihilator_of_term(t: HyperTerm, v: str, alg: OreAlgebra | None = None) -> OrePoly:
    """First-order annihilator den(q)·S_v − num(q), q the v-quotient."""
    q = shift_quotient(t, v)
    alg = alg or OreAlgebra([v], t.table)
    return alg.from_univariate(alg.symbols[alg.vars.index(v)],
                               [RatFun.from_poly(-q.num), RatFun.from_poly(q.den)])


# ----------------------------------------------------------------- evaluation

def comb_binomial(n: int, k: int) -> int:
    if 0 <= k <= n:
        return math.comb(n, k)
    return 0


_EXT_CACHE: dict = {(0, 0): fmpq(1), (-1, 0): fmpq(1), (-1, -1): fmpq(1)}


def _ext_fill(n_lo: int, n_hi: int, k_lo: int, k_hi: int) -> None:
    """Propagate the binomial recurrences from the three seeds over a box."""
    c = _EXT_CACHE
    changed = True
    while changed:
        changed = False
        for n in range(n_lo, n_hi + 1):
            for k in range(k_lo, k_hi + 1):
                if (n, k) in c:
                    continue
                val = None
                # (n-k+1) C(n+1,k) = (n+1) C(n,k), read at (n-1,k) and at (n,k)
                if (n - 1, k) in c and (n - k) != 0:
                    val = fmpq(n) * c[(n - 1, k)] / (n - k)
                elif (n + 1, k) in c and (n + 1) != 0:
                    val = fmpq(n - k + 1) * c[(n + 1, k)] / (n + 1)
                # (k+1) C(n,k+1) = (n-k) C(n,k)
                elif (n, k - 1) in c and k != 0:
                    val = fmpq(n - k + 1) * c[(n, k - 1)] / k
                elif (n, k + 1) in c and (n - k) != 0:
                    val = fmpq(k + 1) * c[(n, k + 1)] / (n - k)
                if val is not None:
                    c[(n, k)] = val
                    changed = True


@lru_cache(maxsize=None)
def ext_binomial(n: int, k: int) -> int:
    """Binomial coefficient seeded with C(0,0)=C(-1,0)=C(-1,-1)=1 and
    extended to Z×Z by the two first-order recurrences."""
    if (n, k) not in _EXT_CACHE:
        lo_n, hi_n = min(n, -1) - 1, max(n, 0) + 1
        lo_k, hi_k = min(k, -1) - 1, max(k, 0) + 1
        _ext_fill(lo_n, hi_n, lo_k, hi_k)
    v = _EXT_CACHE[(n, k)]
    assert v.q == 1
    return int(v.p)


def _gamma_symbolic(u: int, table: VarTable) -> RatFun:
    # Γ(u+eps)/(Γ(u)Γ(1+eps)): the constant Γ(1+eps) cancels in every quotient
    e = RatFun.from_poly(table.var(EPS))
    out = RatFun.const(1, table)
    for j in range(1, u):
        out = out * (1 + e / j)
    return out


def eval_term(t: HyperTerm, point: Mapping[str, object], convention: str = COMBINATORIAL,
              eps_mode: str = LIMIT_ZERO) -> RatFun:
    """Exact value at an integer point; unbound variables stay symbolic.

    Gamma ratios are normalised by the u-independent constant Γ(1+eps). With
    ``eps_mode="limit_zero"`` they evaluate to 1 for u >= 1 and 0 for u <= 0.
    """
    if convention not in (COMBINATORIAL, EXTENDED):
        raise ValueError(f"unknown convention {convention!r}")
    if eps_mode not in (SYMBOLIC, LIMIT_ZERO):
        raise ValueError(f"unknown eps mode {eps_mode!r}")
    table = t.table
    bind = {k: v for k, v in point.items() if k in table}
    val = RatFun.const(1, table)
    zero = False
    pole = None
    for f in t.factors:
        if isinstance(f, Binomial):
            n = _lin_value(f.top, bind)
            k = _lin_value(f.bottom, bind)
            c = comb_binomial(n, k) if convention == COMBINATORIAL else ext_binomial(n, k)
            if c == 0:
                zero = True
            else:
                val = val * c
        elif isinstance(f, GammaRatio):
            u = _lin_value(f.arg, bind)
            if u <= 0:
                if eps_mode == SYMBOLIC:
                    pole = pole or f"Γ({u}) is a pole; the ratio needs eps_mode=limit_zero"
                else:
                    zero = True
            elif eps_mode == SYMBOLIC:
                val = val * _gamma_symbolic(u, table)
        elif isinstance(f, Power):
            e = _lin_value(f.exponent, bind)
            base = f.base.subs(bind)
            if base.is_zero() and e < 0:
                raise PoleError("zero base with negative exponent")
            val = val * base ** e
        elif isinstance(f, RatFactor):
            val = val * f.f.subs(bind)
        else:
            raise TypeError(f"unknown factor {f!r}")
    # a vanishing binomial wins over a gamma pole, whatever the factor order
    if zero:
        return RatFun.const(0, table)
    if pole:
        raise PoleError(pole)
    return val


class TermEvaluator:
    """Repeated evaluation of one term at many integer points.

    Linear arguments are compiled to integer coefficient vectors and bases are
    cached per parameter values, which makes box scans cheap. Semantics match
    ``eval_term``.
    """

    def __init__(self, t: HyperTerm, convention: str = COMBINATORIAL,
                 eps_mode: str = LIMIT_ZERO):
        if convention not in (COMBINATORIAL, EXTENDED):
            raise ValueError(f"unknown convention {convention!r}")
        if eps_mode not in (SYMBOLIC, LIMIT_ZERO):
            raise ValueError(f"unknown eps mode {eps_mode!r}")
        self.table = t.table
        self.convention = convention
        self.eps_mode = eps_mode
        self.binom = comb_binomial if convention == COMBINATORIAL else ext_binomial
        self.plan = []
        for f in t.factors:
            if isinstance(f, Binomial):
                self.plan.append(("B", self._form(f.top), self._form(f.bottom)))
            elif isinstance(f, GammaRatio):
                self.plan.append(("G", self._form(f.arg)))
            elif isinstance(f, Power):
                self.plan.append(("P", self._form(f.exponent), f.base,
                                  sorted(f.base.variables(), key=self.table.index)))
            elif isinstance(f, RatFactor):
                self.plan.append(("R", f.f, sorted(f.f.variables(), key=self.table.index)))
            else:
                raise TypeError(f"unknown factor {f!r}")
        self._cache: dict = {}

    def _form(self, p: MPoly):
        names = self.table.names
        const = 0
        coeffs = []
        for e, c in p.terms():
            if not any(e):
                const = int(c.p)
            else:
                coeffs.append((names[e.index(1)], int(c.p)))
        return coeffs, const

    @staticmethod
    def _lin(form, point) -> int:
        coeffs, const = form
        return const + sum(c * point[v] for v, c in coeffs)

    def is_zero(self, point: Mapping[str, int]) -> bool:
        for step in self.plan:
            if step[0] == "B":
                if self.binom(self._lin(step[1], point), self._lin(step[2], point)) == 0:
                    return True
            elif step[0] == "G" and self._lin(step[1], point) <= 0:
                return True
        return False

    def _base(self, f: RatFun, names, point, e: int = 1) -> RatFun:
        key = (id(f), tuple(point.get(v) for v in names), e)
        if key not in self._cache:
            base = f.subs({v: point[v] for v in names if v in point})
            if base.is_zero() and e < 0:
                raise PoleError("zero base with negative exponent")
            self._cache[key] = base ** e
        return self._cache[key]

    def __call__(self, point: Mapping[str, int]) -> RatFun:
        table = self.table
        num = 1
        val = None
        pole = None
        for step in self.plan:
            kind = step[0]
            if kind == "B":
                c = self.binom(self._lin(step[1], point), self._lin(step[2], point))
                if c == 0:
                    return RatFun.const(0, table)
                num *= c
            elif kind == "G":
                u = self._lin(step[1], point)
                if u <= 0:
                    if self.eps_mode != SYMBOLIC:
                        return RatFun.const(0, table)
                    pole = pole or f"Γ({u}) is a pole; the ratio needs eps_mode=limit_zero"
                elif self.eps_mode == SYMBOLIC:
                    g = self._cache.get(("G", u))
                    if g is None:
                        g = self._cache[("G", u)] = _gamma_symbolic(u, table)
                    val = g if val is None else val * g
            elif kind == "P":
                f = self._base(step[2], step[3], point, self._lin(step[1], point))
                val = f if val is None else val * f
            else:
                f = self._base(step[1], step[2], point)
                val = f if val is None else val * f
        if pole:
            raise PoleError(pole)
        out = RatFun.const(num, table)
        return out if val is None else val * num


# ----------------------------------------------------------------- support

@dataclass(frozen=True)
class SupportBox:
    """Conjunction of affine inequalities ``form >= 0`` over the free variables."""

    inequalities: tuple
    variables: tuple

    def contains(self, point: Mapping[str, int]) -> bool:
        return all(_lin_value(f, point) >= 0 for f in self.inequalities)

    def bounds(self, max_iter: int = 500) -> dict:
        """Per-variable integer bounds by interval propagation (None = unbounded)."""
        lo = {v: None for v in self.variables}
        hi = {v: None for v in self.variables}
        rows = []
        for f in self.inequalities:
            coeffs = {v: _lin_coeff(f, v) for v in self.variables}
            const = _lin_value(f, {nm: 0 for nm in f.table.names})
            rows.append((coeffs, const))
        for _ in range(max_iter):
            changed = False
            for coeffs, const in rows:
                for v, a in coeffs.items():
                    if a == 0:
                        continue
                    # a*v >= -const - sum_{w != v} a_w w >= -const - max(sum a_w w)
                    top = 0
                    ok = True
                    for w, c in coeffs.items():
                        if w == v or c == 0:
                            continue
                        bnd = hi[w] if c > 0 else lo[w]
                        if bnd is None:
                            ok = False
                            break
                        top += c * bnd
                    if not ok:
                        continue
                    if a > 0:
                        lb = _ceil_div(-const - top, a)
                        if lo[v] is None or lb > lo[v]:
                            lo[v] = lb
                            changed = True
                    else:
                        ub = _floor_div(const + top, -a)
                        if hi[v] is None or ub < hi[v]:
                            hi[v] = ub
                            changed = True
            if not changed:
                break
        return {v: (lo[v], hi[v]) for v in self.variables}

    def points(self):
        """All integer points (requires a bounded box)."""
        b = self.bounds()
        for v, (l, h) in b.items():
            if l is None or h is None:
                raise ValueError(f"support is unbounded in {v}")
        vs = list(self.variables)

        def rec(idx, cur):
            if idx == len(vs):
                if self.contains(cur):
                    yield dict(cur)
                return
            l, h = b[vs[idx]]
            for val in range(l, h + 1):
                cur[vs[idx]] = val
                yield from rec(idx + 1, cur)
            cur.pop(vs[idx], None)

        yield from rec(0, {})

    def __str__(self):
        return " and ".join(f"{f} >= 0" for f in self.inequalities)


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def support_box(t: HyperTerm, params: Mapping[str, int], variables: Sequence[str] | None = None
                ) -> SupportBox:
    """Exact nonzero region (combinatorial convention, gamma ratios in the limit)."""
    table = t.table
    bind = {k: table.const(v) for k, v in params.items()}
    ineqs = []
    for f in t.factors:
        if isinstance(f, Binomial):
            top = f.top.compose(bind)
            bot = f.bottom.compose(bind)
            ineqs.append(bot)
            ineqs.append(top - bot)
        elif isinstance(f, GammaRatio):
            ineqs.append(f.arg.compose(bind) - 1)
    # drop constant-true inequalities; keep constant-false ones (empty support)
    out = []
    seen = set()
    for q in ineqs:
        if q.is_constant():
            if q.constant_value() < 0:
                out.append(q)
            continue
        key = str(q)
        if key not in seen:
            seen.add(key)
            out.append(q)
    if variables is None:
        vs = set()
        for q in out:
            vs |= q.variables()
        variables = tuple(v for v in table.names if v in vs)
    return SupportBox(tuple(out), tuple(variables))


# ----------------------------------------------------------------- parser

_NODES = ("Binomial", "Pow", "Rat", "GammaRatio", "Mul")


def parse_term(text: str, sumvars=(), params=(), table: VarTable | None = None) -> HyperTerm:
    """Parse the summand language, e.g. ``Mul(Binomial(n,k), Pow(2,-n))``."""
    table = table or default_table()
    factors = _TermParser(text, table).parse()
    return HyperTerm(tuple(factors), tuple(sumvars), tuple(params), table)


class _TermParser:
    def __init__(self, text: str, table: VarTable):
        self.text = text
        self.pos = 0
        self.table = table

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def parse(self):
        self.skip()
        out = self.node()
        self.skip()
        if self.pos != len(self.text):
            raise ParseError(f"unexpected trailing input {self.text[self.pos:]!r}", self.pos)
        return out

    def node(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        name = self.text[start:self.pos]
        if name not in _NODES:
            raise ParseError(f"expected one of {', '.join(_NODES)}, found {name or self.text[start:start+1]!r}",
                             start)
        self.skip()
        if self.pos >= len(self.text) or self.text[self.pos] != "(":
            raise ParseError("expected '('", self.pos)
        self.pos += 1
        if name == "Mul":
            out = []
            self.skip()
            if self.pos < len(self.text) and self.text[self.pos] == ")":
                self.pos += 1
                return out
            while True:
                out.extend(self.node())
                self.skip()
                if self.pos >= len(self.text):
                    raise ParseError("unterminated Mul(", self.pos)
                ch = self.text[self.pos]
                self.pos += 1
                if ch == ")":
                    return out
                if ch != ",":
                    raise ParseError(f"expected ',' or ')', found {ch!r}", self.pos - 1)
        args = self.args()
        want = {"Binomial": 2, "Pow": 2, "Rat": 2, "GammaRatio": 1}[name]
        if len(args) != want:
            raise ParseError(f"{name} takes {want} argument(s), got {len(args)}", start)
        vals = [self.expr(a, at) for a, at in args]
        try:
            if name == "Binomial":
                return [Binomial(_linear(vals[0], self.table), _linear(vals[1], self.table))]
            if name == "Pow":
                return [Power(vals[0], _linear(vals[1], self.table))]
            if name == "Rat":
                if vals[1].is_zero():
                    raise ParseError("Rat with zero denominator", args[1][1])
                return [RatFactor(vals[0] / vals[1])]
            return [GammaRatio(_linear(vals[0], self.table))]
        except NonlinearError as ex:
            raise ParseError(str(ex), start) from None

    def args(self):
        out = []
        depth = 0
        start = self.pos
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "(":
                depth += 1
            elif ch == ")":
                if depth == 0:
                    out.append((self.text[start:self.pos], start))
                    self.pos += 1
                    return out
                depth -= 1
            elif ch == "," and depth == 0:
                out.append((self.text[start:self.pos], start))
                start = self.pos + 1
            self.pos += 1
        raise ParseError("unterminated argument list", self.pos)

    def expr(self, s: str, at: int) -> RatFun:
        if not s.strip():
            raise ParseError("empty argument", at)
        try:
            return parse_ratfun(s, self.table)
        except ParseError as ex:
            raise ParseError(str(ex).rsplit(" at position", 1)[0], at + ex.pos) from None
