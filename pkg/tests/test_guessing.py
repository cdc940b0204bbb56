import random

import pytest

from helpers import T
from holosum.algebra import RatFun, parse_ratfun
from holosum.guessing import (GuessProblem, ValidationFailure, guess_recurrence,
                              guessed_is_right_factor)
from holosum.ore import OreAlgebra, parse_operator

AN = OreAlgebra(["n"], T)
AS = OreAlgebra(["s"], T)


def powers_of_two():
    return GuessProblem({(n,): 2 ** n for n in range(11)}, ("n",), "n", 1, {"n": 0})


def test_powers_of_two():
    assert guess_recurrence(powers_of_two()) == parse_operator("S_n - 2", AN)


def test_polynomial_sequence():
    data = {(n,): n * (n - 1) * (n - 2) * (n - 3) // 24 for n in range(4, 30)}
    got = guess_recurrence(GuessProblem(data, ("n",), "n", 1, {"n": 1}))
    assert got == parse_operator("(n-3)*S_n - (n+1)", AN).normalize()


def test_random_data_has_no_recurrence():
    rng = random.Random(7)
    data = {(n,): rng.randint(-10 ** 6, 10 ** 6) for n in range(40)}
    assert guess_recurrence(GuessProblem(data, ("n",), "n", 2, {"n": 1})) is None


def test_validation_failure_is_distinct():
    # a geometric run broken at its last value, which only the withheld
    # equation at n=18 reads
    data = {(n,): 3 ** n for n in range(20)}
    data[(19,)] += 1
    prob = GuessProblem(data, ("n",), "n", 1, {"n": 0}, validation=((18,),),
                        escalate_order=False)
    with pytest.raises(ValidationFailure):
        guess_recurrence(prob)


def test_symbolic_coefficients():
    # (1 + x)^n with x symbolic
    x = parse_ratfun("1 + x", T)
    data = {(n,): x ** n for n in range(8)}
    prob = GuessProblem(data, ("n",), "n", 1, {"n": 0, "x": 1}, ("x",), T)
    assert guess_recurrence(prob) == parse_operator("S_n - (1 + x)", AN)


def test_deterministic():
    a = guess_recurrence(powers_of_two())
    b = guess_recurrence(powers_of_two())
    assert a.dumps() == b.dumps()


def test_right_factor_examples(theorem_operator):
    toy = parse_operator("(n-3)*S_n^2 + (5-3*n)*S_n + 2*(n+1)", AN)
    assert guessed_is_right_factor(toy, parse_operator("S_n - 2", AN), "S_n")
    assert not guessed_is_right_factor(parse_operator("S_n^2 - 3*S_n + 2", AN),
                                       parse_operator("S_n - 3", AN), "S_n")
    left = parse_operator("(x*s + b)*S_s - (m + 2)/(s + 1)", AS)
    assert guessed_is_right_factor(left * theorem_operator, theorem_operator, "S_s")


def test_guessed_matches_theorem(guessed_operator, theorem_operator):
    assert guessed_operator == theorem_operator
