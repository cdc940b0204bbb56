import json

import pytest

from helpers import T
from holosum.algebra import parse_mpoly, parse_ratfun
from holosum.cli import run
from holosum.gs import eval_gs
from holosum.ore import OrePoly, OreAlgebra, parse_operator
from holosum.telescoping import CTResult

BINOM = ["--term", "Binomial(n,k)", "--var", "k"]


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def machine(capsys, *argv):
    code, out, _ = call(capsys, *argv, "--format", "machine")
    return code, out, [json.loads(line) for line in out.splitlines()]


def test_eval(capsys):
    assert call(capsys, "eval", "--b", "2", "--m", "1", "--s", "1")[:2] == (0, "-x\n")
    code, out, _ = call(capsys, "eval", "--m", "1", "--s", "2")
    assert code == 0
    assert parse_mpoly(out.strip(), T) == eval_gs(None, 1, 2)


def test_eval_split(capsys):
    code, out, _ = call(capsys, "eval-split", "--m", "1", "--s", "2")
    assert code == 0
    assert out.splitlines()[1] == "G2: " + str(parse_mpoly("3*b*(b-1)*x^2", T))


def test_eval_usage_errors(capsys):
    assert call(capsys, "eval", "--b", "2", "--m", "-1", "--s", "1")[0] == 2
    assert call(capsys, "eval", "--b", "two", "--m", "1", "--s", "1")[0] == 2
    assert call(capsys, "nonsense")[0] == 2
    assert call(capsys)[0] == 2


def test_gosper_exit_codes(capsys):
    assert call(capsys, "gosper", *BINOM)[:2] == (1, "not summable\n")
    code, out, _ = call(capsys, "gosper", "--term", "Mul(Binomial(n,k),Pow(-1,k))", "--var", "k")
    assert code == 0
    assert parse_ratfun(out.strip(), T) == parse_ratfun("-k/n", T)
    code, _, err = call(capsys, "gosper", "--term", "Binomial(n,k", "--var", "k")
    assert code == 2 and "--term" in err


def test_zeilberger_machine_round_trip(capsys):
    argv = ("zeilberger", *BINOM, "--shifts", "n")
    code, out, (rec,) = machine(capsys, *argv)
    assert code == 0 and rec["kind"] == "ct"
    res = CTResult.from_record(rec)
    assert res.telescoper == parse_operator("S_n - 2", OreAlgebra(["n"], T))
    assert machine(capsys, *argv)[1] == out


def test_zeilberger_failure_and_usage(capsys):
    # the Franel sum of cubed binomials needs order 2
    sq = ["--term", "Mul(Binomial(n,k),Binomial(n,k),Binomial(n,k))", "--var", "k",
          "--shifts", "n"]
    assert call(capsys, "zeilberger", *sq, "--max-order", "1")[0] == 1
    assert call(capsys, "zeilberger", *sq, "--max-order", "0")[0] == 2
    assert call(capsys, "zeilberger", *BINOM, "--shifts", "q")[0] == 2


def test_multisum_ct(capsys):
    code, _, (rec,) = machine(capsys, "multisum-ct", "--term", "Binomial(n,k)", "--vars", "k",
                              "--shifts", "n")
    assert code == 0 and rec["kind"] == "ct"
    assert call(capsys, "multisum-ct", "--term", "Binomial(n,k)", "--vars", "k",
                "--shifts", "n", "--profiles", "bogus")[0] == 2


def test_verify_ct(capsys):
    ok = ("verify-ct", "--term", "Binomial(n,k)", "--telescoper", "S_n - 2", "--shifts", "n")
    assert call(capsys, *ok, "--cert", "k=k/(k-n-1)")[:2] == (0, "residual: 0\n")
    assert call(capsys, *ok, "--cert", "k=k/(k-n-2)")[0] == 1
    assert call(capsys, *ok, "--cert", "k/(k-n-1)")[0] == 2


def test_assemble_and_homogenize(capsys):
    argv = (*BINOM, "--shifts", "n", "--lower", "5", "--upper", "n")
    code, out, _ = call(capsys, "assemble", *argv)
    assert code == 0 and "compensated" in out
    code, _, (rec,) = machine(capsys, "homogenize", *argv)
    assert code == 0
    op = OrePoly.from_record(rec["operator"])
    assert op == parse_operator("(n-3)*S_n^2 + (5-3*n)*S_n + 2*(n+1)", OreAlgebra(["n"], T))
    assert call(capsys, "assemble", *argv[:-1], "n+")[0] == 2


def test_guess(capsys):
    code, out, _ = call(capsys, "guess", "--values", "1,2,4,8,16,32,64,128", "--order", "1")
    assert (code, out) == (0, f"{parse_operator('S_n - 2', OreAlgebra(['n'], T))}\n")
    code, out, _ = call(capsys, "guess", "--values", "1,5,2,9,3,7,1,8", "--order", "1")
    assert (code, out) == (1, "no recurrence found\n")
    assert call(capsys, "guess", "--values", "1,2,(", "--order", "1")[0] == 2
    assert call(capsys, "guess", "--values", "1,2,4", "--degrees", "n")[0] == 2


def test_prove_toy(capsys):
    code, out, _ = call(capsys, "prove-toy")
    assert code == 0
    assert out.rstrip().splitlines()[-1] == "operator: " + str(
        parse_operator("(n-3)*S_n^2 + (5-3*n)*S_n + 2*(n+1)", OreAlgebra(["n"], T)).normalize())
    code, first, (rec,) = machine(capsys, "prove-toy")
    assert rec["kind"] == "pipeline" and all(rec["flags"].values())
    assert machine(capsys, "prove-toy")[1] == first


def test_prove_gs_naive_fails(capsys):
    code, out, _ = call(capsys, "prove-gs", "--mode", "naive", "--max-order", "2",
                        "--grid-b", "2", "--grid-m", "2", "--grid-s", "2", "--no-compare")
    assert code == 1
    assert "annihilation check on 1 points: 1 nonzero residuals" in out
    assert call(capsys, "prove-gs", "--mode", "three-gamma")[0] == 2
    assert call(capsys, "prove-gs", "--grid-m", "1-x")[0] == 2


def test_gf_check(capsys):
    code, _, (rec,) = machine(capsys, "gf-check", "--M", "3", "--S", "3")
    assert code == 0 and rec["unit"] == -1 and rec["mismatches"] == []
    assert call(capsys, "gf-check", "--M", "0")[0] == 2


def test_benchmark(capsys):
    code, _, rows = machine(capsys, "benchmark", "--strategies", "gf-check")
    assert code == 0 and [r["strategy"] for r in rows] == ["gf-check"]
    assert call(capsys, "benchmark", "--strategies", "")[:2] == (0, "")
    assert call(capsys, "benchmark", "--strategies", "warp")[0] == 2
