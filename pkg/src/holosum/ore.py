"""Shift Ore algebras with rational-function coefficients.

An operator is a finite sum ``Σ c_α S^α`` with the commutation rule
``S_v · f = f(v+1) · S_v``. Division, LCLM and the apply-closure are
restricted to operators in a single shift symbol.
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, Mapping

from flint import fmpq

from .algebra import MPoly, RatFun, VarTable, default_table, parse_ratfun, to_fmpq
from .linalg import solve_linear

__all__ = ["OreAlgebra", "OrePoly", "AlgebraMismatch", "shift_symbol"]


class AlgebraMismatch(ValueError):
    pass


def shift_symbol(var: str) -> str:
    return f"S_{var}"


class OreAlgebra:
    """Pure shift algebra over Q(table) in the given variables."""

    __slots__ = ("vars", "table", "symbols")
    _cache: dict = {}

    def __new__(cls, vars: Iterable[str], table: VarTable | None = None):
        table = table or default_table()
        vars = tuple(vars)
        key = (vars, table.names)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        if len(set(vars)) != len(vars):
            raise ValueError("each shift symbol must shift a distinct variable")
        for v in vars:
            table.index(v)
        self = object.__new__(cls)
        self.vars = vars
        self.table = table
        self.symbols = tuple(shift_symbol(v) for v in vars)
        cls._cache[key] = self
        return self

    def __repr__(self):
        return f"OreAlgebra({list(self.symbols)})"

    def __reduce__(self):
        return (OreAlgebra, (self.vars, self.table))

    def var_of(self, symbol: str) -> str:
        if symbol in self.vars:
            return symbol
        if symbol in self.symbols:
            return self.vars[self.symbols.index(symbol)]
        raise KeyError(f"unknown shift symbol {symbol!r}")

    def position(self, symbol: str) -> int:
        return self.vars.index(self.var_of(symbol))

    def gen(self, symbol: str) -> "OrePoly":
        e = [0] * len(self.vars)
        e[self.position(symbol)] = 1
        return OrePoly(self, {tuple(e): RatFun.const(1, self.table)})

    def one(self) -> "OrePoly":
        return OrePoly(self, {(0,) * len(self.vars): RatFun.const(1, self.table)})

    def zero(self) -> "OrePoly":
        return OrePoly(self, {})

    def scalar(self, f) -> "OrePoly":
        f = _as_rat(f, self.table)
        return OrePoly(self, {(0,) * len(self.vars): f})

    def from_univariate(self, symbol: str, coeffs: Iterable) -> "OrePoly":
        """Operator Σ coeffs[j]·S^j in one shift symbol."""
        p = self.position(symbol)
        terms = {}
        for j, c in enumerate(coeffs):
            e = [0] * len(self.vars)
            e[p] = j
            terms[tuple(e)] = _as_rat(c, self.table)
        return OrePoly(self, terms)


def _as_rat(f, table: VarTable) -> RatFun:
    if isinstance(f, RatFun):
        return f
    if isinstance(f, MPoly):
        return RatFun.from_poly(f)
    if isinstance(f, str):
        return parse_ratfun(f, table)
    return RatFun.const(to_fmpq(f), table)


def _sigma(f: RatFun, alg: OreAlgebra, e: tuple) -> RatFun:
    for v, k in zip(alg.vars, e):
        if k:
            f = f.shift(v, k)
    return f


def _order_key(e: tuple):
    return (sum(e), e)


class OrePoly:
    """Element of an :class:`OreAlgebra`; immutable."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: OreAlgebra, terms: Mapping[tuple, RatFun]):
        self.alg = alg
        self.terms = {tuple(e): _as_rat(c, alg.table) for e, c in terms.items()}
        self.terms = {e: c for e, c in self.terms.items() if not c.is_zero()}

    # ------------------------------------------------------------ structure
    def _check(self, other: "OrePoly"):
        if not isinstance(other, OrePoly):
            return None
        if other.alg is not self.alg:
            raise AlgebraMismatch(f"{other.alg} vs {self.alg}")
        return other

    def support(self) -> list[tuple]:
        return sorted(self.terms, key=_order_key, reverse=True)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, e: tuple) -> RatFun:
        return self.terms.get(tuple(e), RatFun.const(0, self.alg.table))

    def order(self, symbol: str | None = None) -> int:
        if not self.terms:
            return -1
        if symbol is None:
            return max(sum(e) for e in self.terms)
        p = self.alg.position(symbol)
        return max(e[p] for e in self.terms)

    def is_univariate(self, symbol: str) -> bool:
        p = self.alg.position(symbol)
        return all(all(v == 0 for a, v in enumerate(e) if a != p) for e in self.terms)

    def coefficients(self, symbol: str) -> list[RatFun]:
        """Coefficients of S^0..S^order of a univariate operator."""
        if not self.is_univariate(symbol):
            raise ValueError(f"operator is not univariate in {symbol}")
        p = self.alg.position(symbol)
        out = [RatFun.const(0, self.alg.table)] * (self.order(symbol) + 1)
        for e, c in self.terms.items():
            out[e[p]] = c
        return out

    def leading_coefficient(self) -> RatFun:
        if not self.terms:
            return RatFun.const(0, self.alg.table)
        return self.terms[self.support()[0]]

    # ------------------------------------------------------------ arithmetic
    def __add__(self, other):
        if not isinstance(other, OrePoly):
            other = self.alg.scalar(other)
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] + c if e in t else c
        return OrePoly(self.alg, t)

    __radd__ = __add__

    def __neg__(self):
        return OrePoly(self.alg, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, OrePoly):
            other = self.alg.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, OrePoly):
            f = _as_rat(other, self.alg.table)
            return self * self.alg.scalar(f)
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * _sigma(c2, self.alg, e1)
                out[e] = out[e] + v if e in out else v
        return OrePoly(self.alg, out)

    def __rmul__(self, other):
        # scalar on the left
        f = _as_rat(other, self.alg.table)
        return OrePoly(self.alg, {e: f * c for e, c in self.terms.items()})

    def __pow__(self, n: int):
        out = self.alg.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, OrePoly):
            return False
        return self.alg is other.alg and self.terms == other.terms

    def __hash__(self):
        return hash(self.dumps())

    def left_scale(self, f) -> "OrePoly":
        f = _as_rat(f, self.alg.table)
        return OrePoly(self.alg, {e: f * c for e, c in self.terms.items()})

    def map_coefficients(self, fn: Callable[[RatFun], RatFun]) -> "OrePoly":
        return OrePoly(self.alg, {e: fn(c) for e, c in self.terms.items()})

    def subs(self, bindings: Mapping[str, object]) -> "OrePoly":
        return self.map_coefficients(lambda c: c.subs(bindings))

    # ------------------------------------------------------------ action
    def apply(self, f: Callable[[dict], object]) -> Callable[[dict], RatFun]:
        """Action on a sequence given as a function of a point (dict)."""
        alg = self

        def g(point: dict):
            total = RatFun.const(0, alg.alg.table)
            bind = {k: v for k, v in point.items() if k in alg.alg.table}
            for e, c in alg.terms.items():
                cv = c.subs(bind)
                sh = dict(point)
                for v, k in zip(alg.alg.vars, e):
                    if k:
                        sh[v] = sh[v] + k
                total = total + cv * _as_rat(f(sh), alg.alg.table)
            return total

        return g

    def apply_to_ratfun(self, terms_of_shift: Callable[[tuple], RatFun]) -> RatFun:
        """Σ c_α · g(α) for a symbolic function of the shift vector."""
        total = RatFun.const(0, self.alg.table)
        for e, c in self.terms.items():
            total = total + c * terms_of_shift(e)
        return total

    # ------------------------------------------------------------ univariate algebra
    def right_divide(self, other: "OrePoly", symbol: str):
        """(q, r) with self = q·other + r and order(r) < order(other)."""
        self._check(other)
        if not (self.is_univariate(symbol) and other.is_univariate(symbol)):
            raise ValueError(f"right division needs operators univariate in {symbol}")
        if other.is_zero():
            raise ZeroDivisionError("division by the zero operator")
        p = self.alg.position(symbol)
        d = other.order(symbol)
        lead_b = other.coefficient(_unit(len(self.alg.vars), p, d))
        q = self.alg.zero()
        r = self
        while not r.is_zero() and r.order(symbol) >= d:
            n = r.order(symbol)
            lead_r = r.coefficient(_unit(len(self.alg.vars), p, n))
            e = _unit(len(self.alg.vars), p, n - d)
            t = OrePoly(self.alg, {e: lead_r / _sigma(lead_b, self.alg, e)})
            q = q + t
            r = r - t * other
        return q, r

    def right_remainder(self, other: "OrePoly", symbol: str) -> "OrePoly":
        return self.right_divide(other, symbol)[1]

    def lclm(self, other: "OrePoly", symbol: str) -> "OrePoly":
        """Least common left multiple of two univariate operators."""
        self._check(other)
        if self.is_zero() or other.is_zero():
            raise ValueError("lclm of the zero operator")
        for op in (self, other):
            if not op.is_univariate(symbol):
                raise ValueError(f"lclm needs operators univariate in {symbol}")
        da, db = self.order(symbol), other.order(symbol)
        if db == 0:
            return self.normalize()
        if da == 0:
            return other.normalize()
        p = self.alg.position(symbol)
        S = self.alg.gen(symbol)
        rems = []
        shifted = self
        for N in range(max(da, db), da + db + 1):
            while len(rems) <= N - da:
                rems.append(shifted.right_remainder(other, symbol))
                shifted = S * shifted
            cols = [[r.coefficient(_unit(len(self.alg.vars), p, j)) for j in range(db)] for r in rems]
            system = [[cols[c][j] for c in range(len(cols))] for j in range(db)]
            sol = solve_linear(system, None, table=self.alg.table)
            if sol.nullspace:
                vec = sol.nullspace[0]
                L = self.alg.zero()
                for j, c in enumerate(vec):
                    if not c.is_zero():
                        L = L + c * (S ** j) * self
                return L.normalize()
        raise ArithmeticError("lclm escalation failed")  # unreachable in theory

    def apply_closure(self, acting: "OrePoly", symbol: str) -> "OrePoly":
        """Annihilator of ``acting·h`` for every ``h`` killed by ``self``."""
        self._check(acting)
        if acting.is_zero():
            raise ValueError("acting operator is zero")
        for op in (self, acting):
            if not op.is_univariate(symbol):
                raise ValueError(f"apply_closure needs operators univariate in {symbol}")
        r = self.order(symbol)
        p = self.alg.position(symbol)
        S = self.alg.gen(symbol)
        rems = []
        cur = acting
        for N in range(0, r + 1):
            rems.append(cur.right_remainder(self, symbol))
            cur = S * cur
            system = [[rm.coefficient(_unit(len(self.alg.vars), p, j)) for rm in rems]
                      for j in range(r)]
            if not system:
                system = [[RatFun.const(0, self.alg.table)] * len(rems)]
            sol = solve_linear(system, None, table=self.alg.table)
            if sol.nullspace:
                vec = sol.nullspace[0]
                return self.alg.from_univariate(symbol, vec).normalize()
        raise ArithmeticError("no dependence found")  # unreachable in theory

    # ------------------------------------------------------------ normal form
    def normalize(self) -> "OrePoly":
        """Primitive polynomial coefficients, positive leading rational."""
        if self.is_zero():
            return self
        table = self.alg.table
        den = table.one()
        for c in self.terms.values():
            if not c.den.is_one():
                den = den * c.den.exact_div(den.gcd(c.den))
        nums = {e: c.num * den.exact_div(c.den) for e, c in self.terms.items()}
        g = None
        for v in nums.values():
            g = v if g is None else g.gcd(v)
            if g.is_constant():
                break
        if not g.is_constant():
            nums = {e: v.exact_div(g) for e, v in nums.items()}
        lead = nums[max(nums, key=_order_key)]
        cs = [v.content() for v in nums.values()]
        from math import gcd, lcm
        cnum = 0
        cden = 1
        for c in cs:
            cnum = gcd(cnum, int(c.p))
            cden = lcm(cden, int(c.q))
        scale = fmpq(cnum, cden)
        if lead.leading_coefficient() < 0:
            scale = -scale
        return OrePoly(self.alg, {e: RatFun.from_poly(MPoly(v._p / scale, table))
                                  for e, v in nums.items()})

    def is_right_factor_of(self, big: "OrePoly", symbol: str) -> bool:
        return big.right_remainder(self, symbol).is_zero()

    # ------------------------------------------------------------ text forms
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in self.support():
            c = self.terms[e]
            mono = "*".join(
                (sym if k == 1 else f"{sym}^{k}") for sym, k in zip(self.alg.symbols, e) if k)
            cs = str(c)
            if not mono:
                parts.append(f"({cs})")
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"({cs})*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"OrePoly({self})"

    def to_record(self) -> dict:
        return {
            "algebra": list(self.alg.symbols),
            "vars": list(self.alg.table.names),
            "terms": [[list(e), str(self.terms[e])] for e in self.support()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_record(), separators=(",", ":"))

    @classmethod
    def from_record(cls, rec: dict) -> "OrePoly":
        from .algebra import VarTable
        table = VarTable(rec["vars"]) if "vars" in rec else default_table()
        vars = [s[2:] if s.startswith("S_") else s for s in rec["algebra"]]
        alg = OreAlgebra(vars, table)
        terms = {}
        for e, txt in rec["terms"]:
            if len(e) != len(vars):
                raise ValueError("exponent vector does not match the algebra")
            terms[tuple(int(v) for v in e)] = parse_ratfun(txt, table)
        return cls(alg, terms)

    @classmethod
    def loads(cls, text: str) -> "OrePoly":
        return cls.from_record(json.loads(text))


def _unit(n: int, p: int, k: int) -> tuple:
    e = [0] * n
    e[p] = k
    return tuple(e)


def parse_operator(text: str, alg: OreAlgebra) -> OrePoly:
    """Parse a sum of ``coefficient*S_v^k`` products, e.g. ``(n-3)*S_n^2 - 2``.

    Shift symbols must appear to the right of their coefficient within each
    product; coefficients are parsed with the rational-function parser.
    """
    from .algebra import ParseError, _tokenize

    toks = _tokenize(text)
    table = alg.table
    pos = 0
    result = alg.zero()
    # split into top-level summands
    depth = 0
    start = 0
    chunks = []
    for n, (kind, val, at) in enumerate(toks):
        if val == "(":
            depth += 1
        elif val == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parenthesis", at)
        elif val in "+-" and kind == "op" and depth == 0 and n > start:
            prev = toks[n - 1][1]
            if prev not in ("*", "/", "^", "**", "(", "+", "-"):
                chunks.append((start, n))
                start = n
        elif kind == "end":
            chunks.append((start, n))
    if depth != 0:
        raise ParseError("unbalanced parenthesis", len(text))
    for a, b in chunks:
        seg = toks[a:b]
        if not seg:
            continue
        sign = 1
        if seg[0][1] in "+-" and seg[0][0] == "op":
            sign = -1 if seg[0][1] == "-" else 1
            seg = seg[1:]
        e = [0] * len(alg.vars)
        coef_toks = []
        k = 0
        while k < len(seg):
            kind, val, at = seg[k]
            if kind == "name" and val in alg.symbols:
                p = alg.symbols.index(val)
                power = 1
                if k + 2 < len(seg) + 1 and k + 1 < len(seg) and seg[k + 1][1] in ("^", "**"):
                    if k + 2 >= len(seg) or seg[k + 2][0] != "num":
                        raise ParseError("shift exponent must be an integer", seg[k + 1][2])
                    power = int(seg[k + 2][1])
                    k += 2
                e[p] += power
                if coef_toks and coef_toks[-1][1] == "*":
                    coef_toks.pop()
                k += 1
                if k < len(seg) and seg[k][1] == "*":
                    k += 1
                continue
            coef_toks.append(seg[k])
            k += 1
        if coef_toks:
            lo = coef_toks[0][2]
            hi_tok = coef_toks[-1]
            hi = hi_tok[2] + len(hi_tok[1])
            coef = parse_ratfun(text[lo:hi], table)
        else:
            coef = RatFun.const(1, table)
        result = result + OrePoly(alg, {tuple(e): coef * sign})
    return result
