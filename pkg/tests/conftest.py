"""Session fixtures for the expensive pipeline runs; each runs at most once."""

import time

import pytest

from holosum.algebra import default_table
from holosum.gs import ONE_GAMMA, TWO_GAMMA, benchmark, guess_gs, prove_gs, prove_toy
from holosum.ore import OreAlgebra, parse_operator

# third-order recurrence in s, as published; used only as a test oracle
THEOREM_OPERATOR = (
    "(s+2)*(b*x-1)*S_s^3"
    " + (m*(b*x-1)*(x-1) + b*s*x*(x-2) + b*x*(x-3) - s*(2*x-3) - 3*x + 5)*S_s^2"
    " - (x-1)*(b*m*x + b*s*x + b*x + m*x - 2*m + s*x - 3*s + x - 4)*S_s"
    " + (x-1)^2*(m+s+1)"
)

# wall-clock seconds of the session fixtures, read by the acceptance checks
TIMINGS = {}
# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def timed(name, fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    TIMINGS[name] = time.perf_counter() - t0
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def theorem_operator():
    return parse_operator(THEOREM_OPERATOR, OreAlgebra(["s"], default_table())).normalize()


@pytest.fixture(scope="session")
def guessed_operator():
    return timed("guess", guess_gs)


@pytest.fixture(scope="session")
def toy_report():
    return timed("toy", prove_toy)


@pytest.fixture(scope="session")
def one_gamma_report(guessed_operator):
    return timed("one-gamma", prove_gs, ONE_GAMMA, max_order=4, guessed=guessed_operator)


@pytest.fixture(scope="session")
def two_gamma_report(guessed_operator):
    return timed("two-gamma", prove_gs, TWO_GAMMA, max_order=4, guessed=guessed_operator)


@pytest.fixture(scope="session")
def benchmark_rows():
    return benchmark(["gf-check", "one-gamma", "two-gamma"])
