import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E, H
from slodowy_ais.functions import (
    ArgumentShift,
    ConstantFunction,
    LinearFunction,
    PowerTrace,
    ProductFunction,
    coordinate_function,
    directional_derivative,
    invariants,
    stacked_gradients,
)
from slodowy_ais.lie_core import adjoint_action, make_context, pair, sample
from slodowy_ais.slodowy import principal_triple


def fd_gradient_check(f, x, v, step=1e-6):
    # d/ds f(x + s v) against pair(grad f, v)
    ctx = f.ctx
    num = (f.value(x + step * v) - f.value(x - step * v)) / (2 * step)
    return num, pair(ctx, f.gradient(x), v)


def test_invariant_values(ctx2):
    f1 = invariants(ctx2)[0]
    assert f1.value(H) == pytest.approx(2)
    assert f1.degree == 2


def test_invariants_vanish_on_xi(ctx):
    xi = principal_triple(ctx).xi
    for f in invariants(ctx):
        assert abs(f.value(xi)) < 1e-14


def test_invariants_conjugation(ctx, rng):
    x = sample(ctx, rng)
    g = sample(ctx, rng, "group")
    for f in invariants(ctx):
        v = f.value(x)
        assert abs(f.value(adjoint_action(g, x)) - v) <= 1e-9 * max(1, abs(v))


@pytest.mark.parametrize("form", ["trace", "killing"])
def test_gradients_against_finite_differences(form, rng):
    for n in (2, 3, 4):
        ctx = make_context(n, form)
        x, v = sample(ctx, rng), sample(ctx, rng)
        beta = sample(ctx, rng, "regular_semisimple")
        fns = invariants(ctx) + [ArgumentShift(f, beta, 1) for f in invariants(ctx)]
        fns.append(ProductFunction(LinearFunction(ctx, x), coordinate_function(ctx, 0)))
        for f in fns:
            num, exact = fd_gradient_check(f, x, v)
            assert abs(num - exact) <= 1e-6 * max(1, abs(exact))


def test_gradients_traceless(ctx, rng):
    x = sample(ctx, rng)
    for f in invariants(ctx):
        assert abs(np.trace(f.gradient(x))) < 1e-12


def test_constant_and_coordinate(ctx, rng):
    x = sample(ctx, rng)
    c = ConstantFunction(ctx, 3.0)
    assert c.value(x) == 3.0 and np.all(c.gradient(x) == 0)
    for j in range(ctx.dim):
        assert coordinate_function(ctx, j).value(x) == pytest.approx(ctx.coords(x)[j])


def test_directional_derivative_hand_examples(ctx2):
    f1 = invariants(ctx2)[0]
    assert directional_derivative(f1, E, 1, H)[0] == pytest.approx(0)
    x = np.array([[0.3, 1.0], [2.0, -0.3]])
    beta = np.diag([1.0, -1.0])
    # d_beta tr(x^2) = 2 tr(x beta)
    assert directional_derivative(f1, beta, 1, x)[0] == pytest.approx(2 * np.trace(x @ beta))
    assert directional_derivative(f1, beta, 0, x)[0] == pytest.approx(f1.value(x))


def test_directional_derivative_range(ctx2):
    f1 = invariants(ctx2)[0]
    with pytest.raises(ValueError):
        directional_derivative(f1, E, 3, H)
    with pytest.raises(ValueError):
        ArgumentShift(f1, E, -1)


def test_top_derivative_constant(ctx, rng):
    beta = sample(ctx, rng, "regular_semisimple")
    zero = np.zeros((ctx.n, ctx.n))
    for f in invariants(ctx):
        top = f.degree
        at0 = directional_derivative(f, beta, top, zero)[0]
        atx = directional_derivative(f, beta, top, sample(ctx, rng))[0]
        assert abs(atx - at0) <= 1e-9 * max(1, abs(at0))
        # the constant is d! tr(beta^d)
        expect = math.factorial(top) * np.trace(np.linalg.matrix_power(beta, top))
        assert abs(at0 - expect) <= 1e-9 * max(1, abs(expect))


def _sympy_shift(n, k, j, x, beta):
    t = sp.symbols("t")
    m = sp.Matrix(n, n, lambda a, b: sp.nsimplify(x[a, b]) + t * sp.nsimplify(beta[a, b]))
    poly = sp.expand((m**k).trace())
    return complex(sp.diff(poly, t, j).subs(t, 0))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 4))
def test_directional_derivative_against_sympy(seed, n):
    ctx = make_context(n)
    rng = np.random.default_rng(seed)
    # small integer entries keep the symbolic expansion exact
    x = rng.integers(-3, 4, (n, n)).astype(float)
    beta = rng.integers(-3, 4, (n, n)).astype(float)
    x -= np.trace(x) / n * np.eye(n)
    beta -= np.trace(beta) / n * np.eye(n)
    for f in invariants(ctx):
        for j in range(f.degree + 1):
            ref = _sympy_shift(n, f.degree, j, x, beta)
            got = directional_derivative(f, beta, j, x)[0]
            assert abs(got - ref) <= 1e-9 * max(1, abs(ref))


def test_argument_shift_degree_and_labels(ctx3, rng):
    beta = sample(ctx3, rng, "regular_semisimple")
    f3 = invariants(ctx3)[1]
    s = ArgumentShift(f3, beta, 2)
    assert s.degree == 1 and "d_beta^2" in s.label
    x = sample(ctx3, rng)
    assert ArgumentShift(f3, beta, 0).value(x) == f3.value(x)


def test_stacked_gradients_is_jacobian(ctx, rng):
    x = sample(ctx, rng)
    fns = invariants(ctx)
    jac = stacked_gradients(ctx, fns, x)
    assert jac.shape == (ctx.rank, ctx.dim)
    step = 1e-6
    for j in range(ctx.dim):
        e = ctx.basis[j]
        col = [(f.value(x + step * e) - f.value(x - step * e)) / (2 * step) for f in fns]
        np.testing.assert_allclose(jac[:, j], col, rtol=1e-6, atol=1e-6)


def test_power_trace_rejects_zero(ctx2):
    with pytest.raises(ValueError):
        PowerTrace(ctx2, 0)
