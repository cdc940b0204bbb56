from fractions import Fraction

import pytest
from hypothesis import given, settings

from helpers import T, polys, ratfuns
from holosum.algebra import (MPoly, ParseError, PoleError, RatFun, TableMismatch, VarTable,
                             format_ratfun, parse_mpoly, parse_ratfun, to_fraction)
from holosum.linalg import nullspace_q, rref_q, solve_linear


def P(text):
    return parse_mpoly(text, T)


def R(text):
    return parse_ratfun(text, T)


def test_polynomial_arithmetic():
    a, b = P("x + n"), P("x - n")
    assert a * b == P("x^2 - n^2")
    assert (a + b) == P("2*x")
    assert (a - b) == P("2*n")
    assert a ** 3 == a * a * a
    assert P("x^2*n + 3").degree("x") == 2
    assert P("x^2*n + 3").total_degree() == 3
    assert P("x^2*n + 3").variables() == {"x", "n"}


def test_gcd_and_exact_division():
    g = P("x - k + 1")
    a, b = g * P("x + 2"), g * P("n^2 + 1")
    assert a.gcd(b).monic() == g.monic()
    assert a.exact_div(g) == P("x + 2")
    assert g.divides(a)
    assert not P("x + 2").divides(b)


def test_factor_recovers_linear_pieces():
    p = P("(k - n - 1)*(k + 2)^2*3")
    unit, facs = p.factor()
    prod = MPoly.from_terms({(0,) * len(T): 1}, T) * unit
    for f, e in facs:
        prod = prod * f ** e
    assert prod == p
    assert sorted(e for _, e in facs) == [1, 2]


def test_ratfun_normal_form():
    f = R("(k^2 - 1)/(k - 1)")
    assert f == R("k + 1")
    assert f.is_polynomial()
    assert to_fraction(R("2/4").constant_value()) == Fraction(1, 2)
    assert R("(x+1)/(2*x+2)") == R("1/2")


def test_ratfun_evaluation_and_poles():
    f = R("k/(k - n - 1)")
    assert to_fraction(f.evaluate({"k": 5, "n": 7})) == Fraction(-5, 3)
    with pytest.raises(PoleError):
        f.subs({"k": 8, "n": 7})
    # partial substitution keeps the rest symbolic
    assert f.subs({"n": 0}) == R("k/(k - 1)")


def test_shift_and_compose():
    f = R("1/(k*(k+1))")
    assert f.shift("k") == R("1/((k+1)*(k+2))")
    assert f.shift("k", -1) == R("1/((k-1)*k)")
    assert f.compose({"k": R("n + 2")}) == R("1/((n+2)*(n+3))")


def test_parse_round_trip():
    for text in ["(x*b - 1)/(r - s - 1)", "3/7", "-n^3 + 2*n", "eps*(m + 1)/(b^2)"]:
        f = R(text)
        assert R(format_ratfun(f)) == f


def test_parse_errors():
    for bad in ["x +", "(x", "x ^ y", "q + 1", "1/0"]:
        with pytest.raises((ParseError, ZeroDivisionError)):
            R(bad)


def test_table_mismatch():
    other = VarTable(("x", "y"))
    with pytest.raises(TableMismatch):
        P("x") + other.var("x")


def test_solve_linear_numeric():
    sol = solve_linear([[1, 2], [3, 4]], [5, 6])
    assert sol.consistent
    assert [to_fraction(v) for v in sol.particular] == [Fraction(-4), Fraction(9, 2)]
    assert sol.nullspace == []
    bad = solve_linear([[1, 1], [1, 1]], [0, 1])
    assert not bad.consistent


def test_solve_linear_parametric():
    # [[x, 1], [1, x]] c = [1, 0]
    sys_ = [[R("x"), R("1")], [R("1"), R("x")]]
    sol = solve_linear(sys_, [R("1"), R("0")], T)
    c0, c1 = sol.particular
    assert c0 == R("x/(x^2 - 1)")
    assert c1 == R("-1/(x^2 - 1)")


def test_nullspace_and_rref():
    rows = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    ns = nullspace_q(rows)
    assert len(ns) == 1
    for row in rows:
        assert sum(Fraction(a) * to_fraction(b) for a, b in zip(row, ns[0])) == 0
    _, piv = rref_q(rows)
    assert list(piv) == [0, 1]


@settings(max_examples=200, deadline=None)
@given(polys(), polys(), polys())
def test_polynomial_ring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == T.zero()


@settings(max_examples=150, deadline=None)
@given(ratfuns(), ratfuns(), ratfuns())
def test_rational_field_laws(f, g, h):
    assert (f + g) * h == f * h + g * h
    assert (f * g) * h == f * (g * h)
    if not g.is_zero():
        assert (f / g) * g == f
        assert g * g.inverse() == RatFun.const(1, T)


@settings(max_examples=150, deadline=None)
@given(ratfuns(), ratfuns())
def test_shift_is_a_ring_morphism(f, g):
    assert (f * g).shift("k") == f.shift("k") * g.shift("k")
    assert (f + g).shift("n", 2) == f.shift("n", 2) + g.shift("n", 2)
    assert f.shift("k").shift("k", -1) == f
