from hypothesis import given, settings, strategies as st

from helpers import T, polys
from holosum.algebra import RatFun, parse_mpoly
from holosum.interp import ParamSystem, kernel_vector
from holosum.linalg import solve_linear

P = lambda text: parse_mpoly(text, T)


def apply_rows(entries, nrows, ncols, vec):
    out = []
    for r in range(nrows):
        acc = RatFun.const(0, T)
        for c in range(ncols):
            if (r, c) in entries:
                acc = acc + RatFun.from_poly(entries[(r, c)]) * vec[c]
        out.append(acc)
    return out


def proportional(u, v):
    k = next(i for i, a in enumerate(u) if not a.is_zero())
    return all(a * v[k] == b * u[k] for a, b in zip(u, v))


def test_two_parameter_kernel():
    e = {(0, 0): P("x"), (0, 1): P("1"), (1, 1): P("x*b"), (1, 2): P("-1-b")}
    vec = kernel_vector(ParamSystem(e, 2, 3, ["x", "b"], T), 0)
    assert all(r.is_zero() for r in apply_rows(e, 2, 3, vec))
    dense = [[e.get((r, c), T.zero()) for c in range(3)] for r in range(2)]
    ref = solve_linear(dense, None, T).nullspace
    assert len(ref) == 1 and proportional(vec, ref[0])


def test_no_kernel():
    e = {(0, 0): P("x"), (1, 1): P("b + 1")}
    assert kernel_vector(ParamSystem(e, 2, 2, ["x", "b"], T), 0) is None


def test_target_column_must_be_hit():
    # the only kernel direction lives in column 0, before the target
    e = {(0, 1): P("x"), (1, 2): P("b")}
    assert kernel_vector(ParamSystem(e, 2, 3, ["x", "b"], T), 1) is None


@settings(max_examples=25, deadline=None)
@given(st.lists(polys(("x", "b"), max_deg=2, max_terms=3), min_size=6, max_size=6))
def test_agrees_with_fraction_free_route(cells):
    # 2x3 parametric systems: both routes must agree up to scale
    e = {(r, c): cells[3 * r + c] for r in range(2) for c in range(3)
         if not cells[3 * r + c].is_zero()}
    dense = [[e.get((r, c), T.zero()) for c in range(3)] for r in range(2)]
    ref = solve_linear(dense, None, T).nullspace
    vec = kernel_vector(ParamSystem(e, 2, 3, ["x", "b"], T), 0)
    if len(ref) != 1:
        return
    assert vec is not None
    assert all(r.is_zero() for r in apply_rows(e, 2, 3, vec))
    assert proportional(vec, ref[0])
