import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E, F, H
from slodowy_ais.functions import invariants
from slodowy_ais.lie_core import (
    adjoint_action,
    adjoint_inverse_action,
    bracket,
    classify,
    make_context,
    sample,
)
from slodowy_ais.slodowy import (
    ConjugatorRefused,
    NotRegular,
    conjugator,
    invariant_values,
    kostant_section,
    kostant_section_triangular,
    make_slice,
    principal_triple,
    slice_representative,
    transversality_rank,
)


def test_triple_n2():
    t = principal_triple(make_context(2))
    np.testing.assert_array_equal(t.xi, E)
    np.testing.assert_array_equal(t.h, H)
    np.testing.assert_array_equal(t.eta, F)


def test_triple_n3():
    t = principal_triple(make_context(3))
    np.testing.assert_array_equal(np.diag(t.h), [2, 0, -2])
    assert np.linalg.norm(bracket(t.xi, t.eta) - t.h) == 0


@pytest.mark.parametrize("n", range(2, 7))
def test_triple_relations_and_regularity(n):
    ctx = make_context(n)
    t = principal_triple(ctx)
    assert max(t.relation_residuals()) <= 1e-12
    assert classify(ctx, t.xi).is_regular
    assert classify(ctx, t.eta).is_regular


def test_slice_basis(slc):
    eta = slc.triple.eta
    assert slc.rank == slc.ctx.rank
    for z in slc.basis:
        assert np.linalg.norm(bracket(z, eta)) <= 1e-14 * max(1, np.linalg.norm(z))
    np.testing.assert_array_equal(slc.point(np.zeros(slc.rank)), slc.xi)


def test_slice_n2_form():
    slc = make_slice(make_context(2))
    np.testing.assert_allclose(slc.point([0.5]), E + 0.5 * F)


def test_slice_coords_round_trip(slc, rng):
    c = rng.standard_normal(slc.rank) + 1j * rng.standard_normal(slc.rank)
    np.testing.assert_allclose(slc.coords(slc.point(c)), c, atol=1e-12)


def test_slice_points_regular(slc, rng):
    for _ in range(100):
        c = 5 * (rng.standard_normal(slc.rank) + 1j * rng.standard_normal(slc.rank))
        assert classify(slc.ctx, slc.point(c)).is_regular is True


def test_kostant_n2_closed_form():
    slc = make_slice(make_context(2))
    for v in (0.0, 2.0, -3 + 1j):
        c = kostant_section(slc, [v])
        assert c[0] == pytest.approx(v / 2)


def test_kostant_zero_target(slc):
    np.testing.assert_allclose(kostant_section(slc, np.zeros(slc.rank)), 0, atol=1e-14)


def test_kostant_bad_target(slc):
    with pytest.raises(ValueError):
        kostant_section(slc, np.zeros(slc.rank + 1))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 5))
def test_kostant_matches_triangular_oracle(seed, n):
    ctx = make_context(n)
    slc = make_slice(ctx)
    rng = np.random.default_rng(seed)
    target = invariant_values(invariants(ctx), sample(ctx, rng, "regular_semisimple"))
    c = kostant_section(slc, target, seed=seed)
    oracle = kostant_section_triangular(slc, target)
    assert np.linalg.norm(c - oracle) <= 1e-8 * (1 + np.linalg.norm(oracle))
    res = invariant_values(invariants(ctx), slc.point(c)) - target
    assert np.linalg.norm(res) <= 1e-10 * (1 + np.linalg.norm(target))


def test_kostant_multistart_agreement(ctx3, rng):
    slc = make_slice(ctx3)
    for k in range(20):
        target = invariant_values(invariants(ctx3), sample(ctx3, rng, "regular_semisimple"))
        c0 = kostant_section(slc, target)
        start = 3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        c1 = kostant_section(slc, target, start=start, seed=k)
        assert np.linalg.norm(c1 - c0) <= 1e-8 * (1 + np.linalg.norm(c0))


def test_transversality(slc, rng):
    for _ in range(10):
        c = rng.standard_normal(slc.rank) + 1j * rng.standard_normal(slc.rank)
        assert transversality_rank(slc, slc.point(c)) == slc.ctx.dim


def test_slice_representative_examples():
    ctx = make_context(2)
    slc = make_slice(ctx)
    tx, c = slice_representative(slc, -slc.xi)
    np.testing.assert_allclose(tx, slc.xi, atol=1e-14)
    tx, c = slice_representative(slc, H)
    np.testing.assert_allclose(tx, E + F, atol=1e-12)
    assert c[0] == pytest.approx(1)


def test_slice_representative_spectrum(slc, rng):
    for _ in range(10):
        x = sample(slc.ctx, rng, "regular_semisimple")
        tx, _ = slice_representative(slc, x)
        a = np.sort_complex(np.linalg.eigvals(tx))
        b = np.sort_complex(np.linalg.eigvals(-x))
        assert np.max(np.abs(a - b)) <= 1e-7 * max(1, np.abs(b).max())


def test_slice_representative_rejects_zero(ctx3):
    with pytest.raises(NotRegular):
        slice_representative(make_slice(ctx3), np.zeros((3, 3)))


def test_conjugator_identity_case(ctx3, rng):
    x = sample(ctx3, rng, "regular_semisimple")
    g = conjugator(ctx3, -x, -x)
    np.testing.assert_allclose(adjoint_inverse_action(g, -x), -x, atol=1e-10)
    # g commutes with x, so it lies in the torus of x
    np.testing.assert_allclose(g @ x, x @ g, atol=1e-9)


def test_conjugator_n2_by_hand():
    ctx = make_context(2)
    g = conjugator(ctx, E + F, H)
    assert np.linalg.norm(adjoint_inverse_action(g, E + F) - H) <= 1e-12
    # columns are eigenvectors of [[0,1],[1,0]]
    for k, lam in enumerate([1, -1]):
        v = g[:, k]
        np.testing.assert_allclose((E + F) @ v, lam * v, atol=1e-12)


def test_conjugator_round_trip(slc, rng):
    for _ in range(10):
        x = sample(slc.ctx, rng, "regular_semisimple")
        tx, _ = slice_representative(slc, x)
        g = conjugator(slc.ctx, tx, -x)
        assert abs(np.linalg.det(g) - 1) < 1e-10
        # phi(g, tilde_x) = -g^{-1} tilde_x g
        assert np.linalg.norm(-adjoint_inverse_action(g, tx) - x) <= 1e-7 * max(1, np.linalg.norm(x))


def test_conjugator_refuses_nilpotent(ctx3):
    slc = make_slice(ctx3)
    with pytest.raises(ConjugatorRefused):
        conjugator(ctx3, slc.xi, -(-slc.xi))


def test_conjugator_refuses_different_spectra(ctx2):
    with pytest.raises(ConjugatorRefused):
        conjugator(ctx2, H, 2 * H)


def test_equivariance_of_representative(slc, rng):
    x = sample(slc.ctx, rng, "regular_semisimple")
    g = sample(slc.ctx, rng, "group")
    a, _ = slice_representative(slc, x)
    b, _ = slice_representative(slc, adjoint_action(g, x))
    assert np.linalg.norm(a - b) <= 1e-7 * max(1, np.linalg.norm(a))
