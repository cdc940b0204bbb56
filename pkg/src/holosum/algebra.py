"""Exact multivariate polynomials and rational functions over Q.

Arithmetic is delegated to FLINT's ``fmpq_mpoly``; this module adds a fixed
variable table, canonical normal forms, a text format with a parser, and
evaluation with pole detection.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping

import flint
from flint import fmpq, fmpz

__all__ = [
    "VarTable",
    "MPoly",
    "RatFun",
    "PoleError",
    "TableMismatch",
    "DEFAULT_VARS",
    "default_table",
    "to_fmpq",
    "to_fraction",
    "parse_ratfun",
    "parse_mpoly",
]

DEFAULT_VARS = ("x", "b", "m", "s", "k", "r", "i", "j", "n", "eps", "y", "z")


class PoleError(ZeroDivisionError):
    """A denominator vanished under evaluation."""


class TableMismatch(ValueError):
    pass


def to_fmpq(c) -> fmpq:
    if isinstance(c, fmpq):
        return c
    if isinstance(c, (int, fmpz)):
        return fmpq(c)
    if isinstance(c, Fraction):
        return fmpq(c.numerator, c.denominator)
    if isinstance(c, str):
        if "/" in c:
            p, q = c.split("/")
            return fmpq(int(p), int(q))
        return fmpq(int(c))
    raise TypeError(f"cannot convert {c!r} to a rational")


def to_fraction(c) -> Fraction:
    c = to_fmpq(c)
    return Fraction(int(c.p), int(c.q))


class VarTable:
    """Ordered, immutable list of variable names.

    The order defines the monomial order (graded lexicographic, first name
    largest) and therefore the canonical printed form.
    """

    __slots__ = ("names", "_index", "ctx")
    _cache: dict = {}

    def __new__(cls, names: Iterable[str]):
        names = tuple(names)
        hit = cls._cache.get(names)
        if hit is not None:
            return hit
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for nm in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", nm):
                raise ValueError(f"bad variable name {nm!r}")
        self = object.__new__(cls)
        self.names = names
        self._index = {nm: n for n, nm in enumerate(names)}
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")
        cls._cache[names] = self
        return self

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def __repr__(self):
        return f"VarTable({list(self.names)})"

    def __reduce__(self):
        return (VarTable, (self.names,))

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def extend(self, extra: Iterable[str]) -> "VarTable":
        new = [nm for nm in extra if nm not in self._index]
        return VarTable(self.names + tuple(dict.fromkeys(new))) if new else self

    # constructors
    def var(self, name: str) -> "MPoly":
        return MPoly(self.ctx.gen(self.index(name)), self)

    def gens(self):
        return [MPoly(g, self) for g in self.ctx.gens()]

    def const(self, c) -> "MPoly":
        return MPoly(self.ctx.from_dict({(0,) * len(self.names): to_fmpq(c)}) if c != 0
                     else self.ctx.from_dict({}), self)

    def zero(self) -> "MPoly":
        return MPoly(self.ctx.from_dict({}), self)

    def one(self) -> "MPoly":
        return self.const(1)


_DEFAULT = None


def default_table() -> VarTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = VarTable(DEFAULT_VARS)
    return _DEFAULT


def _coerce_poly(other, table: VarTable):
    if isinstance(other, MPoly):
        if other.table is not table:
            raise TableMismatch(f"{other.table} vs {table}")
        return other._p
    if isinstance(other, (int, fmpz, fmpq, Fraction)):
        c = to_fmpq(other)
        return table.ctx.from_dict({(0,) * len(table): c}) if c != 0 else table.ctx.from_dict({})
    return None


class MPoly:
    """Multivariate polynomial with rational coefficients."""

    __slots__ = ("_p", "table")

    def __init__(self, p, table: VarTable):
        self._p = p
        self.table = table

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, object], table: VarTable) -> "MPoly":
        d = {}
        for e, c in terms.items():
            if len(e) != len(table):
                raise ValueError("exponent vector length does not match the variable table")
            c = to_fmpq(c)
            if c != 0:
                d[tuple(int(v) for v in e)] = c
        return cls(table.ctx.from_dict(d), table)

    # basic protocol
    def __add__(self, other):
        o = _coerce_poly(other, self.table)
        if o is None:
            return NotImplemented
        return MPoly(self._p + o, self.table)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_poly(other, self.table)
        if o is None:
            return NotImplemented
        return MPoly(self._p - o, self.table)

    def __rsub__(self, other):
        o = _coerce_poly(other, self.table)
        if o is None:
            return NotImplemented
        return MPoly(o - self._p, self.table)

    def __mul__(self, other):
        o = _coerce_poly(other, self.table)
        if o is None:
            return NotImplemented
        return MPoly(self._p * o, self.table)

    __rmul__ = __mul__

    def __neg__(self):
        return MPoly(-self._p, self.table)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        return MPoly(self._p ** e, self.table)

    def __truediv__(self, other):
        return RatFun(self, other if isinstance(other, MPoly) else self.table.const(other)) \
            if not isinstance(other, RatFun) else RatFun.from_poly(self) / other

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.table is other.table and self._p == other._p
        if isinstance(other, RatFun):
            return other == self
        o = _coerce_poly(other, self.table)
        return o is not None and self._p == o

    def __hash__(self):
        return hash((self.table.names, str(self._p)))

    def __bool__(self):
        return not self._p.is_zero()

    def __str__(self):
        return str(self._p)

    def __repr__(self):
        return f"MPoly({self})"

    # queries
    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def is_one(self) -> bool:
        return self._p.is_one()

    def constant_value(self) -> fmpq:
        if not self._p.is_constant():
            raise ValueError("not a constant")
        return self._p.coefficient(0) if not self._p.is_zero() else fmpq(0)

    def degree(self, var: str) -> int:
        if self._p.is_zero():
            return -1
        return int(self._p.degrees()[self.table.index(var)])

    def degrees(self) -> dict:
        if self._p.is_zero():
            return {nm: -1 for nm in self.table}
        return dict(zip(self.table.names, (int(d) for d in self._p.degrees())))

    def total_degree(self) -> int:
        return -1 if self._p.is_zero() else int(self._p.total_degree())

    def variables(self) -> set:
        if self._p.is_zero():
            return set()
        return {nm for nm, d in zip(self.table.names, self._p.degrees()) if d > 0}

    def terms(self):
        """List of (exponent tuple, fmpq coefficient), in canonical order."""
        return [(tuple(int(v) for v in e), c) for e, c in self._p.terms()]

    def nterms(self) -> int:
        return len(self._p)

    def leading_coefficient(self) -> fmpq:
        return self._p.leading_coefficient() if not self._p.is_zero() else fmpq(0)

    def content(self) -> fmpq:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if self._p.is_zero():
            return fmpq(0)
        cs = [c for _, c in self._p.terms()]
        num = reduce(lambda a, b: a.gcd(b), (c.p for c in cs))
        den = reduce(lambda a, b: a * b // a.gcd(b), (c.q for c in cs))
        return fmpq(abs(num), den)

    def primitive(self) -> "MPoly":
        """Integer, content one, positive leading coefficient."""
        if self._p.is_zero():
            return self
        c = self.content()
        if self.leading_coefficient() < 0:
            c = -c
        return MPoly(self._p / c, self.table)

    def monic(self) -> "MPoly":
        if self._p.is_zero():
            return self
        return MPoly(self._p / self._p.leading_coefficient(), self.table)

    # algebra
    def gcd(self, other: "MPoly") -> "MPoly":
        return MPoly(self._p.gcd(_coerce_poly(other, self.table)), self.table)

    def exact_div(self, other: "MPoly") -> "MPoly":
        o = _coerce_poly(other, self.table)
        if o.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        return MPoly(self._p / o, self.table)

    def divides(self, other: "MPoly") -> bool:
        q, r = divmod(_coerce_poly(other, self.table), self._p)
        return r.is_zero()

    def factor(self):
        """(constant, [(factor, multiplicity), ...]); factors are primitive."""
        c, fs = self._p.factor()
        out = []
        for f, mult in fs:
            g = MPoly(f, self.table)
            pg = g.primitive()
            c = c * (g.leading_coefficient() / pg.leading_coefficient()) ** mult
            out.append((pg, int(mult)))
        return c, out

    def subs(self, bindings: Mapping[str, object]) -> "MPoly":
        """Substitute rational numbers for some variables."""
        if not bindings:
            return self
        vals = {}
        for nm, v in bindings.items():
            self.table.index(nm)
            vals[nm] = to_fmpq(v)
        return MPoly(self._p.subs(vals), self.table)

    def compose(self, mapping: Mapping[str, "MPoly"]) -> "MPoly":
        """Substitute polynomials for variables (simultaneously)."""
        if not mapping:
            return self
        gens = list(self.table.ctx.gens())
        for nm, v in mapping.items():
            gens[self.table.index(nm)] = _coerce_poly(v, self.table)
        return MPoly(self._p.compose(*gens), self.table)

    def shift(self, var: str, by: int = 1) -> "MPoly":
        if by == 0 or self.degree(var) <= 0:
            return self
        return self.compose({var: self.table.var(var) + by})

    def __call__(self, *values):
        """Full evaluation at rational values in table order."""
        return self._p(*[to_fmpq(v) for v in values])

    def evaluate(self, point: Mapping[str, object]) -> fmpq:
        p = self.subs({k: v for k, v in point.items() if k in self.table})
        if not p.is_constant():
            raise ValueError(f"unbound variables {sorted(p.variables())}")
        return p.constant_value()

    def coefficients_in(self, var: str) -> dict:
        """Map power of ``var`` to the coefficient polynomial (free of ``var``)."""
        idx = self.table.index(var)
        buckets: dict = {}
        for e, c in self._p.terms():
            d = int(e[idx])
            e2 = list(e)
            e2[idx] = 0
            buckets.setdefault(d, {})[tuple(e2)] = c
        return {d: MPoly(self.table.ctx.from_dict(t), self.table) for d, t in buckets.items()}

    def derivative(self, var: str) -> "MPoly":
        return MPoly(self._p.derivative(self.table.index(var)), self.table)

    def to_table(self, table: VarTable) -> "MPoly":
        """Re-embed in a table containing all variables that occur."""
        if table is self.table:
            return self
        idx = [table.index(nm) for nm in self.table.names]
        d = {}
        for e, c in self._p.terms():
            e2 = [0] * len(table)
            for a, v in zip(idx, e):
                e2[a] = int(v)
            d[tuple(e2)] = c
        return MPoly(table.ctx.from_dict(d), table)


def _as_poly(x, table: VarTable) -> MPoly:
    if isinstance(x, MPoly):
        if x.table is not table:
            raise TableMismatch(f"{x.table} vs {table}")
        return x
    return table.const(x)


class RatFun:
    """Reduced quotient of polynomials.

    Normal form: gcd(num, den) = 1 and den has coprime integer coefficients
    with a positive leading coefficient. Two rational functions are equal iff
    their normal forms coincide.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, _reduced: bool = False):
        if isinstance(num, RatFun) and den is None:
            self.num, self.den = num.num, num.den
            return
        if not isinstance(num, MPoly):
            if isinstance(den, MPoly):
                num = den.table.const(num)
            else:
                raise TypeError("need a variable table: pass an MPoly")
        table = num.table
        if den is None:
            den = table.one()
        den = _as_poly(den, table)
        if den.is_zero():
            raise PoleError("zero denominator")
        if not _reduced:
            if num.is_zero():
                den = table.one()
            elif den.is_constant():
                num = MPoly(num._p / den.constant_value(), table)
                den = table.one()
            else:
                g = num._p.gcd(den._p)
                if not g.is_one():
                    num = MPoly(num._p / g, table)
                    den = MPoly(den._p / g, table)
                c = den.content()
                if den.leading_coefficient() < 0:
                    c = -c
                if c != 1:
                    num = MPoly(num._p / c, table)
                    den = MPoly(den._p / c, table)
        self.num = num
        self.den = den

    @classmethod
    def _coprime(cls, n: MPoly, d: MPoly) -> "RatFun":
        """Normalise a pair already known to be coprime."""
        if n.is_zero():
            return cls(n, n.table.one(), _reduced=True)
        if d.is_constant():
            return cls(MPoly(n._p / d.constant_value(), n.table), n.table.one(), _reduced=True)
        return cls(n, d, _reduced=True)._renormalize()

    @classmethod
    def from_poly(cls, p: MPoly) -> "RatFun":
        return cls(p, p.table.one(), _reduced=True)

    @classmethod
    def const(cls, c, table: VarTable) -> "RatFun":
        return cls(table.const(c), table.one(), _reduced=True)

    @property
    def table(self) -> VarTable:
        return self.num.table

    def _lift(self, other):
        if isinstance(other, RatFun):
            if other.table is not self.table:
                raise TableMismatch(f"{other.table} vs {self.table}")
            return other
        if isinstance(other, MPoly):
            if other.table is not self.table:
                raise TableMismatch(f"{other.table} vs {self.table}")
            return RatFun(other, self.table.one(), _reduced=True)
        if isinstance(other, (int, fmpz, fmpq, Fraction)):
            return RatFun.const(other, self.table)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        if self.den.is_one():
            return RatFun(self.num * o.den + o.num, o.den, _reduced=True)
        if o.den.is_one():
            return RatFun(self.num + o.num * self.den, self.den, _reduced=True)
        g = self.den.gcd(o.den)
        if g.is_one():
            return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)
        d1 = self.den.exact_div(g)
        d2 = o.den.exact_div(g)
        return RatFun(self.num * d2 + o.num * d1, d1 * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.num.is_zero() or o.num.is_zero():
            return RatFun.const(0, self.table)
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n = self.num.exact_div(g1) * o.num.exact_div(g2)
        d = self.den.exact_div(g2) * o.den.exact_div(g1)
        return RatFun._coprime(n, d)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.num.is_zero():
            raise PoleError("inverse of zero")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return RatFun(self.num ** e, self.den ** e, _reduced=True)._renormalize()

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, RatFun) else other
        if o is None or o.table is not self.table:
            return False
        return self.num._p == o.num._p and self.den._p == o.den._p

    def __hash__(self):
        return hash((self.table.names, str(self.num), str(self.den)))

    def __bool__(self):
        return not self.num.is_zero()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_one() and self.num.is_constant()

    def constant_value(self) -> fmpq:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.constant_value()

    def variables(self) -> set:
        return self.num.variables() | self.den.variables()

    def __str__(self):
        return format_ratfun(self)

    def __repr__(self):
        return f"RatFun({self})"

    def subs(self, bindings: Mapping[str, object]) -> "RatFun":
        """Partial evaluation at rational values; raises PoleError on a pole."""
        if not bindings:
            return self
        d = self.den.subs(bindings)
        if d.is_zero():
            raise PoleError(f"pole: denominator {self.den} vanishes at {dict(bindings)}")
        return RatFun(self.num.subs(bindings), d)

    evaluate_partial = subs

    def evaluate(self, point: Mapping[str, object]) -> fmpq:
        r = self.subs({k: v for k, v in point.items() if k in self.table})
        if not r.is_constant():
            raise ValueError(f"unbound variables {sorted(r.variables())}")
        return r.constant_value()

    def compose(self, mapping: Mapping[str, object]) -> "RatFun":
        """Substitute polynomials or rational functions for variables."""
        if not mapping:
            return self
        polys = {}
        rats = {}
        for nm, v in mapping.items():
            if isinstance(v, RatFun) and not v.is_polynomial():
                rats[nm] = v
            else:
                polys[nm] = v.num if isinstance(v, RatFun) else _as_poly(v, self.table)
        if not rats:
            n = self.num.compose(polys)
            d = self.den.compose(polys)
            if d.is_zero():
                raise PoleError(f"pole: denominator {self.den} vanishes under substitution")
            return RatFun(n, d)
        # general case: homogenise with a common denominator per substituted variable
        res_n = _compose_rat(self.num, polys, rats)
        res_d = _compose_rat(self.den, polys, rats)
        if res_d.is_zero():
            raise PoleError(f"pole: denominator {self.den} vanishes under substitution")
        return res_n / res_d

    def shift(self, var: str, by: int = 1) -> "RatFun":
        if by == 0 or var not in self.table:
            return self
        idx = self.table.index(var)
        nd = self.num._p.degrees() if not self.num.is_zero() else None
        dd = self.den._p.degrees()
        if (nd is None or nd[idx] == 0) and dd[idx] == 0:
            return self
        return RatFun(self.num.shift(var, by), self.den.shift(var, by), _reduced=True) \
            ._renormalize()

    def _renormalize(self) -> "RatFun":
        # shifting preserves coprimality but can flip the sign of the leading term
        c = self.den.content()
        if self.den.leading_coefficient() < 0:
            c = -c
        if c == 1:
            return self
        return RatFun(MPoly(self.num._p / c, self.table), MPoly(self.den._p / c, self.table),
                      _reduced=True)

    def to_table(self, table: VarTable) -> "RatFun":
        if table is self.table:
            return self
        return RatFun(self.num.to_table(table), self.den.to_table(table), _reduced=True) \
            ._renormalize()

    def degree(self, var: str):
        return self.num.degree(var), self.den.degree(var)


def _compose_rat(p: MPoly, polys: dict, rats: dict) -> RatFun:
    table = p.table
    out = RatFun.const(0, table)
    base = {nm: RatFun.from_poly(v) for nm, v in polys.items()}
    base.update(rats)
    for e, c in p.terms():
        t = RatFun.const(c, table)
        for nm, ex in zip(table.names, e):
            if ex:
                t = t * (base[nm] ** ex if nm in base else RatFun.from_poly(table.var(nm) ** ex))
        out = out + t
    return out


def format_ratfun(f: RatFun) -> str:
    if f.den.is_one():
        return str(f.num)
    return f"({f.num})/({f.den})"


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),]))")


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _ExprParser:
    """Recursive-descent parser for + - * / ^ over names and integers."""

    def __init__(self, text: str, table: VarTable):
        self.toks = _tokenize(text)
        self.n = 0
        self.table = table

    def peek(self):
        return self.toks[self.n]

    def take(self, val=None):
        t = self.toks[self.n]
        if val is not None and t[1] != val:
            raise ParseError(f"expected {val!r}, found {t[1] or 'end of input'!r}", t[2])
        self.n += 1
        return t

    def parse(self) -> RatFun:
        v = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return v

    def expr(self):
        t = self.peek()
        if t[1] in ("+", "-"):
            self.take()
            v = self.term()
            if t[1] == "-":
                v = -v
        else:
            v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            w = self.factor()
            if op == "*":
                v = v * w
            else:
                if w.is_zero():
                    raise ParseError("division by zero", self.toks[self.n - 1][2])
                v = v / w
        return v

    def factor(self):
        v = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            t = self.peek()
            neg = False
            if t[1] == "-":
                self.take()
                neg = True
                t = self.peek()
            if t[0] != "num":
                raise ParseError("exponent must be an integer literal", t[2])
            self.take()
            e = int(t[1])
            v = v ** (-e if neg else e)
        return v

    def atom(self):
        t = self.peek()
        if t[0] == "num":
            self.take()
            return RatFun.const(int(t[1]), self.table)
        if t[0] == "name":
            self.take()
            if t[1] not in self.table:
                raise ParseError(f"unknown variable {t[1]!r}", t[2])
            return RatFun.from_poly(self.table.var(t[1]))
        if t[1] == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        if t[1] == "-":
            self.take()
            return -self.factor()
        raise ParseError(f"unexpected token {t[1] or 'end of input'!r}", t[2])


def parse_ratfun(text: str, table: VarTable | None = None) -> RatFun:
    return _ExprParser(text, table or default_table()).parse()


def parse_mpoly(text: str, table: VarTable | None = None) -> MPoly:
    f = parse_ratfun(text, table)
    if not f.is_polynomial():
        raise ValueError(f"not a polynomial: {text}")
    return f.num
