from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from helpers import T
from holosum.algebra import RatFun, parse_ratfun
from holosum.boundary import SumSpec
from holosum.gs import NAIVE, gs_summand
from holosum.hyperterm import eval_term, parse_term, shift_quotient
from holosum.ore import OreAlgebra, parse_operator
from holosum.telescoping import (CTResult, certificate_assignments, gosper, multisum_ct,
                                 scan_singularities, verify_ct, zeilberger)

R = lambda text: parse_ratfun(text, T)
AN = OreAlgebra(["n"], T)
ASK = OreAlgebra(["s", "k"], T)
AS = OreAlgebra(["s"], T)

BINOM = parse_term("Binomial(n,k)", ["k"], ["n"])
G1 = parse_term("Mul(Binomial(s,r),Binomial(k-1,r-1),Pow((b-1)/b,r),Pow(b*x,k))",
                ["r"], ["s", "k", "b", "x"])
G1_P = parse_operator("b*s*x*S_s - (k+1)*S_k + x*(k-s)", ASK)
G1_Q = R("-b*x*r*(r-1)*(k-s)/((k-r+1)*(r-(s+1)))")

# certificates of the first-order naive telescoper, unlabelled
NAIVE_CERTS = [
    "(b*k - i*k + b*i*k - b*r + i*r - b*i*r)/(b^2*(i - r)*(1 + r))",
    "r*(b*x-1)/(r-(s+1))",
    "(i*k - i*r + b^2*i*x - b*i*k*x + b^2*i*r*x)/(b^2*(i - r)*(1 + r))",
]
NAIVE_P = parse_operator("(1-b*x)*S_s + (x-1)", AS)


def pair(P, var, q):
    return CTResult(P, {var: q}, RatFun.const(0, T))


# ---------------------------------------------------------------- gosper

def test_gosper_k_factorial():
    # k·k! has quotient (k+1)^2/k; antidifference k! = (1/k)·k·k!
    assert gosper(R("(k+1)^2/k"), "k") == R("1/k")
    assert gosper(R("k+1"), "k") is None


def test_gosper_binomial_not_summable():
    assert gosper(BINOM, "k") is None


def test_gosper_alternating_binomial():
    t = parse_term("Mul(Binomial(n,k),Pow(-1,k))", ["k"], ["n"])
    assert gosper(t, "k") == R("-k/n")


SUMMABLE = [
    ("Pow(2,k)", [], {}),
    ("Rat(1,k*(k+1))", [], {}),
    ("Mul(Binomial(n,k),Pow(-1,k))", ["n"], {"n": 9}),
    ("Mul(Rat(k,1),Pow(3,k))", [], {}),
]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SUMMABLE), st.integers(1, 12), st.integers(0, 12))
def test_gosper_range_sums(case, a, length):
    text, params, fixed = case
    t = parse_term(text, ["k"], params)
    q = gosper(t, "k")
    assert q is not None
    # rational identity
    assert (q.shift("k") * shift_quotient(t, "k") - q) == RatFun.const(1, T)
    b = a + length
    total = sum((eval_term(t, {**fixed, "k": k}) for k in range(a, b + 1)), RatFun.const(0, T))
    at = lambda k: q.subs({**fixed, "k": k}) * eval_term(t, {**fixed, "k": k})
    assert total == at(b + 1) - at(a)


# ---------------------------------------------------------------- certificates

def test_toy_pair_verifies():
    assert verify_ct(BINOM, pair(parse_operator("S_n - 2", AN), "k", R("k/(k-n-1)"))).is_zero()


def test_perturbed_certificate_fails():
    bad = pair(parse_operator("S_n - 2", AN), "k", R("k/(k-n-1) + 1"))
    assert not verify_ct(BINOM, bad).is_zero()


@pytest.mark.xfail(strict=True, reason="the published inner-sum pair holds with the opposite "
                                       "certificate sign under the forward-difference convention")
def test_g1_published_pair_verbatim():
    assert verify_ct(G1, pair(G1_P, "r", G1_Q)).is_zero()


def test_g1_pair_with_forward_difference_sign():
    assert verify_ct(G1, pair(G1_P, "r", -G1_Q)).is_zero()


def test_g1_pair_numerically():
    # independent check with plain rationals
    from fractions import Fraction as F

    def C(n, k):
        return comb(n, k) if 0 <= k <= n else 0

    b, x = F(3), F(2, 7)

    def t(s, k, r):
        return C(s, r) * C(k - 1, r - 1) * ((b - 1) / b) ** r * (b * x) ** k

    def Q(s, k, r):
        return -b * x * r * (r - 1) * (k - s) / ((k - r + 1) * (r - (s + 1)))

    for s, k, r in [(7, 5, 3), (9, 6, 2), (8, 8, 4)]:
        lhs = b * s * x * t(s + 1, k, r) - (k + 1) * t(s, k + 1, r) + x * (k - s) * t(s, k, r)
        delta = Q(s, k, r + 1) * t(s, k, r + 1) - Q(s, k, r) * t(s, k, r)
        assert lhs == -delta


def test_zeilberger_binomial():
    ct = zeilberger(BINOM, "k", ["n"])
    assert ct.verified
    assert ct.telescoper.normalize() == parse_operator("S_n - 2", AN)
    assert ct.certificates["k"] == R("k/(k-n-1)")
    # smaller supports were tried and found infeasible first
    assert all(not a.feasible for a in ct.attempts[:-1])


def test_zeilberger_normalized_binomial():
    t = parse_term("Mul(Binomial(n,k),Pow(1/2,n))", ["k"], ["n"])
    ct = zeilberger(t, "k", ["n"])
    assert ct.telescoper.normalize() == parse_operator("S_n - 1", AN)
    for n in range(13):
        total = sum((eval_term(t, {"n": n, "k": k}) for k in range(n + 1)), RatFun.const(0, T))
        assert total == RatFun.const(1, T)


def test_zeilberger_g1_inner_sum():
    ct = zeilberger(G1, "r", ["s", "k"])
    assert ct.verified
    assert verify_ct(G1, ct).is_zero()
    assert ct.telescoper.normalize() == G1_P.normalize()


def test_multisum_single_variable_matches_zeilberger():
    a = multisum_ct(BINOM, ["k"], ["n"])
    b = zeilberger(BINOM, "k", ["n"])
    assert a.telescoper.normalize() == b.telescoper.normalize()


def test_multisum_naive_summand():
    ct = multisum_ct(gs_summand(NAIVE), ["i", "r", "k"], ["s"], max_order=2, degree_budget=7)
    assert ct.verified
    assert ct.telescoper.normalize() == NAIVE_P.normalize()


def test_naive_certificate_assignment_with_published_sign():
    certs = [R(c) for c in NAIVE_CERTS]
    got = certificate_assignments(gs_summand(NAIVE), NAIVE_P, certs, ["i", "r", "k"])
    assert len(got) == 6
    assert sum(ok for _, ok in got) == 0


def test_naive_certificate_assignment_unique():
    certs = [R(c) for c in NAIVE_CERTS]
    got = certificate_assignments(gs_summand(NAIVE), -NAIVE_P, certs, ["i", "r", "k"])
    good = [c for c, ok in got if ok]
    assert len(good) == 1
    assert good[0]["r"] == R(NAIVE_CERTS[1])
    assert good[0]["k"] == R(NAIVE_CERTS[0])
    assert good[0]["i"] == R(NAIVE_CERTS[2])


# ---------------------------------------------------------------- singularities

def test_scan_toy():
    rep = scan_singularities(pair(parse_operator("S_n - 2", AN), "k", R("k/(k-n-1)")),
                             SumSpec.make("k", 5, "n", BINOM))
    assert [(l.locus, l.kind) for l in rep.loci] == [("n + 1", "boundary")]


def test_scan_g1():
    rep = scan_singularities(pair(G1_P, "r", G1_Q), SumSpec.make("r", 1, "s", G1))
    kinds = {l.locus: l.kind for l in rep.loci}
    assert kinds["s + 1"] == "boundary"
    assert kinds["k + 1"] == "undetermined"


def test_scan_constant_certificate():
    rep = scan_singularities(pair(parse_operator("S_n - 2", AN), "k", R("1")),
                             SumSpec.make("k", 0, "n", BINOM))
    assert not rep


def test_record_round_trip():
    ct = zeilberger(BINOM, "k", ["n"])
    back = CTResult.loads(ct.dumps())
    assert back.telescoper == ct.telescoper
    assert back.certificates == ct.certificates
    assert back.residual.is_zero()
    assert back.dumps() == ct.dumps()

