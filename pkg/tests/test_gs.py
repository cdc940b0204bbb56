import itertools
import json

import pytest

from helpers import T
from holosum.algebra import RatFun, parse_mpoly
from holosum.gs import (DEFAULT_GRID, NAIVE, ONE_GAMMA, PipelineError, annihilation_residuals,
                        benchmark, eps_limit, eval_gs, eval_gs_normalized, eval_gs_split,
                        format_benchmark, gf_check, prove_gs)
from holosum.ore import OreAlgebra, parse_operator

AS = OreAlgebra(["s"], T)
P = lambda text: parse_mpoly(text, T)
FULL_GRID = [(b, m, s) for b in (2, 3, 4) for m in range(1, 7) for s in range(1, 7)]
NAIVE_OP = parse_operator("(1-b*x)*S_s + (x-1)", AS)


def test_oracle_small_cases():
    for m in range(1, 5):
        assert eval_gs(2, m, 0).is_zero()
        assert eval_gs_normalized(3, m, 0).is_zero()
    assert eval_gs(None, 1, 1) == P("-(b-1)*x")
    assert eval_gs_normalized(None, 1, 1) == P("-(b-1)*x")
    assert eval_gs(2, 1, 1) == P("-x")


def test_oracle_rejects_bad_instances():
    with pytest.raises(ValueError):
        eval_gs(2, 0, 0)
    with pytest.raises(ValueError):
        eval_gs(2, -1, 3)


def test_split_parts():
    for m in range(1, 6):
        assert eval_gs_split(3, m, 1)[1].is_zero()
    g1, g2 = eval_gs_split(2, 2, 3)
    assert g1 + g2 == eval_gs(2, 2, 3)
    # m=1, s=2: the second part is the single k=2 column, 3b(b-1)x^2 by hand
    assert eval_gs_split(None, 1, 2)[1] == P("3*b*(b-1)*x^2")


def test_oracles_agree_on_full_grid():
    for b, m, s in FULL_GRID:
        g = eval_gs(b, m, s)
        g1, g2 = eval_gs_split(b, m, s)
        assert g == g1 + g2
        assert g == eval_gs_normalized(b, m, s)


def test_oracles_agree_with_symbolic_b():
    for m, s in itertools.product(range(1, 5), repeat=2):
        g = eval_gs(None, m, s)
        assert g == sum(eval_gs_split(None, m, s), T.zero())
        assert g == eval_gs_normalized(None, m, s)


def test_theorem_operator_annihilates(theorem_operator):
    assert annihilation_residuals(theorem_operator, FULL_GRID) == []
    assert annihilation_residuals(theorem_operator, [(2, 3, 4)]) == []


def test_naive_operator_fails():
    bad = annihilation_residuals(NAIVE_OP, [(2, 2, 2)])
    assert len(bad) == 1
    (point, residual), = bad
    assert point == (2, 2, 2)
    assert not residual.is_zero() and residual.is_polynomial()
    assert residual.variables() == {"x"}


def test_eps_limit_clears_content():
    op = parse_operator("eps*(s+1)*S_s^2 + eps^2*S_s - eps*(s+1+eps)", AS)
    assert eps_limit(op) == parse_operator("S_s^2 - 1", AS)


def test_eps_limit_degenerate():
    op = parse_operator("eps*S_s^2 + S_s - 1", AS)
    with pytest.raises(PipelineError) as err:
        eps_limit(op)
    assert err.value.stage == "eps-limit"


def test_generating_function():
    rep = gf_check(8, 8)
    assert rep.unit == -1
    assert rep.ok
    assert len(rep.matches) == 81
    assert rep.mismatches == []


def test_generating_function_argument_check():
    with pytest.raises(ValueError):
        gf_check(0, 3)


def test_toy_report(toy_report):
    assert toy_report.operator == parse_operator(
        "(n-3)*S_n^2 + (5-3*n)*S_n + 2*(n+1)", OreAlgebra(["n"], T)).normalize()
    assert toy_report.flags == {"rigorous-certificate-identity": True,
                                "annihilates-partial-sums": True}
    text = toy_report.text()
    assert "compensated terms: -n" in text
    assert "inhomogeneous part: 1/24*n^4 - 1/4*n^3 + 11/24*n^2 - 5/4*n" in text


def test_naive_pipeline_is_debunked():
    rep = prove_gs(NAIVE, max_order=2, grid=[(2, 2, 2), (3, 1, 2)], boundary_grid=[(2, 2, 2)])
    assert rep.operator == NAIVE_OP.normalize()
    assert rep.flags["rigorous-certificate-identity"]
    assert not rep.flags["annihilates-oracle-on-grid"]
    assert not rep.flags["grid-verified-boundary-vanishing"]
    assert [g for g, _ in rep.failures] == [(2, 2, 2), (3, 1, 2)]


def test_one_gamma_report(one_gamma_report, guessed_operator):
    rep = one_gamma_report
    assert rep.operator.order("S_s") == 3
    assert rep.operator == guessed_operator
    assert rep.comparison == "equal"
    assert rep.residual.is_zero()
    assert all(rep.flags.values())
    assert rep.boundary_grid == list(DEFAULT_GRID)
    assert rep.boundary["telescoped"] == []
    # the certificates have a pole at m=1; those points are listed apart
    assert {g[1] for g, _ in rep.boundary["limits"]} == {1}
    assert all(g[1] == 1 for g, _ in rep.boundary["pointwise"])
    json.dumps(rep.to_record())


def test_two_gamma_report(two_gamma_report, guessed_operator):
    rep = two_gamma_report
    assert rep.operator.order("S_s") <= 4
    assert guessed_operator.is_right_factor_of(rep.operator, "S_s")
    assert rep.comparison in ("right-factor", "equal")
    assert all(rep.flags.values())


def test_benchmark_empty():
    assert benchmark([]) == []
    assert format_benchmark([]) == ""


def test_benchmark_rejects_unknown():
    with pytest.raises(ValueError):
        benchmark(["bogus"])


def test_benchmark_small_strategies():
    rows = benchmark(["gf-check", "split-sum-stage1"])
    assert [r["strategy"] for r in rows] == ["gf-check", "split-sum-stage1"]
    assert rows[1]["order"] == 1
    assert "gf-check" in format_benchmark(rows)
