"""Hypothesis strategies and small oracles shared by the test modules."""

from fractions import Fraction

from hypothesis import strategies as st

from holosum.algebra import MPoly, RatFun, default_table
from holosum.ore import OreAlgebra, OrePoly

T = default_table()

small_int = st.integers(min_value=-5, max_value=5)
small_q = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, names=("x", "n", "k"), max_deg=2, max_terms=4, nonzero=False):
    terms = {}
    for _ in range(draw(st.integers(min_value=1 if nonzero else 0, max_value=max_terms))):
        e = [0] * len(T)
        for v in names:
            e[T.index(v)] = draw(st.integers(min_value=0, max_value=max_deg))
        terms[tuple(e)] = Fraction(draw(small_q)) or Fraction(1)
    p = MPoly.from_terms(terms, T)
    if nonzero and p.is_zero():
        p = T.one()
    return p


@st.composite
def ratfuns(draw, names=("x", "n", "k"), max_deg=2):
    num = draw(polys(names, max_deg))
    den = draw(polys(names, 1, 2, nonzero=True))
    return RatFun(num, den)


@st.composite
def operators(draw, vars_=("n", "k"), max_order=2, coeff_names=("x", "n", "k")):
    alg = OreAlgebra(list(vars_), T)
    terms = {}
    for _ in range(draw(st.integers(min_value=0, max_value=3))):
        e = tuple(draw(st.integers(min_value=0, max_value=max_order)) for _ in vars_)
        terms[e] = draw(ratfuns(coeff_names, 1))
    return OrePoly(alg, {e: c for e, c in terms.items() if not c.is_zero()})


def points(names, lo=-6, hi=6):
    return st.fixed_dictionaries({v: st.integers(min_value=lo, max_value=hi) for v in names})
