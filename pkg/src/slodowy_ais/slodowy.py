"""Principal sl2-triple, the slice ``xi + Z(eta)`` and the Kostant section solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .functions import PowerTrace, invariants
from .lie_core import (
    LieContext,
    LieError,
    ad_matrix,
    adjoint_inverse_action,
    bracket,
    classify,
    normalize_det,
    numerical_rank,
)


class NotRegular(LieError):
    pass


class KostantConvergenceError(LieError):
    def __init__(self, message, best_residual):
        super().__init__(message)
        self.best_residual = best_residual


class ConjugatorRefused(LieError):
    pass


@dataclass(frozen=True, eq=False)
class SL2Triple:
    xi: np.ndarray
    h: np.ndarray
    eta: np.ndarray

    def relation_residuals(self) -> tuple[float, float, float]:
        return (
            float(np.linalg.norm(bracket(self.xi, self.eta) - self.h)),
            float(np.linalg.norm(bracket(self.h, self.xi) - 2 * self.xi)),
            float(np.linalg.norm(bracket(self.h, self.eta) + 2 * self.eta)),
        )


def principal_triple(ctx: LieContext) -> SL2Triple:
    n = ctx.n
    xi = np.diag(np.ones(n - 1), 1).astype(complex)
    h = np.diag(np.arange(n - 1, -n, -2)).astype(complex)
    eta = np.diag([i * (n - i) for i in range(1, n)], -1).astype(complex)
    return SL2Triple(xi, h, eta)


@dataclass(frozen=True, eq=False)
class SlodowySlice:
    ctx: LieContext
    triple: SL2Triple
    basis: np.ndarray  # (rank, n, n): eta, eta^2, ..., eta^(n-1)

    @property
    def xi(self):
        return self.triple.xi

    @property
    def rank(self) -> int:
        return len(self.basis)

    def point(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=complex)
        return self.triple.xi + np.einsum("k,kab->ab", c, self.basis)

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Least-squares slice coordinates of ``x`` (exact for slice points)."""
        a = self.basis.reshape(self.rank, -1).T
        c, *_ = np.linalg.lstsq(a, (x - self.triple.xi).ravel(), rcond=None)
        return c

    def tangent_coords(self, z: np.ndarray) -> np.ndarray:
        a = self.basis.reshape(self.rank, -1).T
        c, *_ = np.linalg.lstsq(a, z.ravel(), rcond=None)
        return c


def make_slice(ctx: LieContext, triple: SL2Triple | None = None) -> SlodowySlice:
    triple = principal_triple(ctx) if triple is None else triple
    powers = [triple.eta]
    for _ in range(ctx.n - 2):
        powers.append(powers[-1] @ triple.eta)
    basis = np.array(powers)
    r = np.linalg.matrix_rank(basis.reshape(len(basis), -1))
    if r != ctx.rank:
        raise LieError(f"slice basis has rank {r}, expected {ctx.rank}")
    return SlodowySlice(ctx, triple, basis)


def invariant_values(fns: list[PowerTrace], x) -> np.ndarray:
    return np.array([f.value(x) for f in fns])


def slice_jacobian(slc: SlodowySlice, x) -> np.ndarray:
    """``J[i, k] = d f_i / d c_k`` for ``f_i = tr(x^(i+1))`` along the slice."""
    rows = []
    xp = x
    for d in slc.ctx.degrees:
        rows.append([d * np.sum(xp * z.T) for z in slc.basis])
        xp = xp @ x
    return np.array(rows)


def _newton(slc, fns, target, c0, tol, maxiter=60):
    c = np.array(c0, dtype=complex)
    best = (np.inf, c)
    for _ in range(maxiter):
        x = slc.point(c)
        r = invariant_values(fns, x) - target
        res = float(np.linalg.norm(r))
        if not np.isfinite(res):
            break
        if res < best[0]:
            best = (res, c.copy())
        if res <= tol:
            return c, res, best
        try:
            c = c - np.linalg.solve(slice_jacobian(slc, x), r)
        except np.linalg.LinAlgError:
            break
    return None, best[0], best


def kostant_section(
    slc: SlodowySlice,
    target,
    start=None,
    seed=0,
    max_restarts: int = 20,
) -> np.ndarray:
    """Slice coordinates ``c`` with ``F(slice.point(c)) = target``.

    ``F`` is the vector of power traces ``tr(x^2), ..., tr(x^n)``; its values
    do not depend on the active form.  Newton starts at ``start`` (default
    the nilpotent ``xi``) and restarts from random points of norm at most
    ``1 + |target|``.
    """
    ctx = slc.ctx
    target = np.asarray(target, dtype=complex)
    if target.shape != (ctx.rank,):
        raise ValueError(f"target must have {ctx.rank} entries")
    fns = invariants(ctx)
    tnorm = float(np.linalg.norm(target))
    tol = ctx.tol.kostant * (1 + tnorm)
    rng = np.random.default_rng(seed)
    c0 = np.zeros(ctx.rank, dtype=complex) if start is None else np.asarray(start, complex)
    best_res = np.inf
    for attempt in range(max_restarts + 1):
        c, res, _ = _newton(slc, fns, target, c0, tol)
        best_res = min(best_res, res)
        if c is not None:
            jac = slice_jacobian(slc, slc.point(c))
            if np.linalg.cond(jac) > ctx.tol.cond_max:
                raise LieError("slice is not transverse at the solution")
            return c
        u = rng.standard_normal(ctx.rank) + 1j * rng.standard_normal(ctx.rank)
        c0 = u / np.linalg.norm(u) * rng.uniform(0, 1 + tnorm)
    raise KostantConvergenceError(
        f"Newton did not converge after {max_restarts} restarts", best_res
    )


def kostant_section_triangular(slc: SlodowySlice, target) -> np.ndarray:
    """Independent solver by forward substitution.

    With weights ``wt(c_k) = k + 1`` the invariant ``f_i`` is weighted
    homogeneous of weight ``i + 1``, so it depends on ``c_1..c_i`` only and
    is affine in ``c_i``.  Used as a test oracle.
    """
    ctx = slc.ctx
    fns = invariants(ctx)
    c = np.zeros(ctx.rank, dtype=complex)
    for i, f in enumerate(fns):
        c[i] = 0
        base = f.value(slc.point(c))
        c[i] = 1
        slope = f.value(slc.point(c)) - base
        c[i] = (target[i] - base) / slope
    return c


def slice_representative(slc: SlodowySlice, x: np.ndarray, seed=0):
    """The unique slice point on the orbit of ``-x`` and its coordinates."""
    if classify(slc.ctx, x).is_regular is not True:
        raise NotRegular("element is not regular")
    target = invariant_values(invariants(slc.ctx), -x)
    c = kostant_section(slc, target, seed=seed)
    return slc.point(c), c


def conjugator(ctx: LieContext, tilde_x: np.ndarray, minus_x: np.ndarray) -> np.ndarray:
    """Group element ``g`` with ``g^{-1} tilde_x g = minus_x``.

    Only regular semisimple inputs are handled: eigenvectors are matched by
    an optimal assignment of the two spectra.
    """
    scale = max(1.0, float(np.linalg.norm(tilde_x)), float(np.linalg.norm(minus_x)))
    lam, v = np.linalg.eig(tilde_x)
    mu, w = np.linalg.eig(minus_x)
    for spec in (lam, mu):
        gaps = np.abs(spec[:, None] - spec[None, :]) + np.diag(np.full(ctx.n, np.inf))
        if gaps.min() < ctx.tol.cluster_band * scale:
            raise ConjugatorRefused("eigenvalues collide: input is not regular semisimple")
    rows, cols = linear_sum_assignment(np.abs(lam[:, None] - mu[None, :]))
    mismatch = np.abs(lam[rows] - mu[cols]).max()
    if mismatch > 1e-6 * scale:
        raise ConjugatorRefused(f"spectra differ by {mismatch:.3g}")
    g = normalize_det(v[:, rows] @ np.linalg.inv(w[:, cols]))
    res = np.linalg.norm(adjoint_inverse_action(g, tilde_x) - minus_x)
    if res > ctx.tol.conjugator * scale:
        raise ConjugatorRefused(f"conjugation residual {res:.3g} too large")
    return g


def transversality_rank(slc: SlodowySlice, x: np.ndarray) -> int:
    """Rank of ``[ad_x(g) | Z(eta)]`` in basis coordinates; ``dim`` means transverse."""
    ctx = slc.ctx
    cols = np.hstack([ad_matrix(ctx, x), np.array([ctx.coords(z) for z in slc.basis]).T])
    return numerical_rank(cols, ctx.tol.rank).rank
