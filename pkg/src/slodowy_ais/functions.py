"""Polynomial functions on the Lie algebra with exact values and gradients.

A gradient is the algebra element representing the differential through
the active invariant form: ``pair(gradient(x), v) = d/dt f(x + t v)``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .lie_core import LieContext, pair, sharp


class PolyFunction:
    degree: int
    label: str = "f"

    def __init__(self, ctx: LieContext):
        self.ctx = ctx

    def value(self, x: np.ndarray) -> complex:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


class ConstantFunction(PolyFunction):
    degree = 0

    def __init__(self, ctx, c=0.0):
        super().__init__(ctx)
        self.c = complex(c)
        self.label = f"const({self.c})"

    def value(self, x):
        return self.c

    def gradient(self, x):
        return np.zeros((self.ctx.n, self.ctx.n), dtype=complex)


class LinearFunction(PolyFunction):
    """``x -> pair(x, a)``."""

    degree = 1

    def __init__(self, ctx, a, label="lin"):
        super().__init__(ctx)
        self.a = np.asarray(a, dtype=complex)
        self.label = label

    def value(self, x):
        return pair(self.ctx, x, self.a)

    def gradient(self, x):
        return self.a


def coordinate_function(ctx: LieContext, j: int) -> LinearFunction:
    """The linear coordinate returning the ``j``-th basis coefficient."""
    e = np.zeros(ctx.dim, dtype=complex)
    e[j] = 1.0
    return LinearFunction(ctx, sharp(ctx, e), label=f"theta[{j}]")


class ProductFunction(PolyFunction):
    def __init__(self, f: PolyFunction, h: PolyFunction):
        super().__init__(f.ctx)
        self.f, self.h = f, h
        self.degree = f.degree + h.degree
        self.label = f"({f.label})*({h.label})"

    def value(self, x):
        return self.f.value(x) * self.h.value(x)

    def gradient(self, x):
        return self.f.value(x) * self.h.gradient(x) + self.h.value(x) * self.f.gradient(x)


class PowerTrace(PolyFunction):
    """``x -> trace(x^k)``, an adjoint-invariant polynomial of degree ``k``."""

    def __init__(self, ctx, k: int):
        super().__init__(ctx)
        if k < 1:
            raise ValueError("power must be positive")
        self.degree = k
        self.label = f"tr(x^{k})"

    def value(self, x):
        return complex(np.trace(np.linalg.matrix_power(x, self.degree)))

    def gradient(self, x):
        k, n = self.degree, self.ctx.n
        p = np.linalg.matrix_power(x, k - 1)
        g = k * (p - np.trace(p) / n * np.eye(n))
        return g / self.ctx.form_scale


def invariants(ctx: LieContext) -> list[PowerTrace]:
    """Generators ``f_i = trace(x^(i+1))`` of the invariant polynomials, i = 1..n-1."""
    return [PowerTrace(ctx, d) for d in ctx.degrees]


@lru_cache(maxsize=None)
def _chebyshev_solver(d: int):
    k = np.arange(d + 1)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * (d + 1)))
    vander = np.vander(nodes, d + 1, increasing=True)
    cond = np.linalg.cond(vander)
    assert cond < 1e6, f"Chebyshev Vandermonde system ill-conditioned ({cond:.3g})"
    return nodes, np.linalg.inv(vander)


def directional_derivative(f: PolyFunction, beta: np.ndarray, j: int, x: np.ndarray):
    """``(d/dt)^j f(x + t beta)`` at ``t = 0`` together with its gradient in ``x``.

    The polynomial ``t -> f(x + t beta)`` is recovered exactly from its values
    at ``deg f + 1`` Chebyshev nodes.
    """
    d = f.degree
    if not 0 <= j <= d:
        raise ValueError(f"derivative order {j} outside 0..{d}")
    nodes, vinv = _chebyshev_solver(d)
    pts = [x + t * beta for t in nodes]
    vals = np.array([f.value(p) for p in pts])
    grads = np.array([f.gradient(p) for p in pts])
    w = math.factorial(j) * vinv[j]
    return complex(w @ vals), np.einsum("k,kab->ab", w, grads)


class ArgumentShift(PolyFunction):
    """The shifted invariant ``(d_beta)^j f``."""

    def __init__(self, f: PolyFunction, beta: np.ndarray, j: int):
        super().__init__(f.ctx)
        if not 0 <= j <= f.degree:
            raise ValueError(f"derivative order {j} outside 0..{f.degree}")
        self.f, self.beta, self.j = f, np.asarray(beta, dtype=complex), j
        self.degree = f.degree - j
        self.label = f"d_beta^{j} {f.label}"

    def value(self, x):
        if self.j == 0:
            return self.f.value(x)
        return directional_derivative(self.f, self.beta, self.j, x)[0]

    def gradient(self, x):
        if self.j == 0:
            return self.f.gradient(x)
        return directional_derivative(self.f, self.beta, self.j, x)[1]


def stacked_gradients(ctx: LieContext, fns, x) -> np.ndarray:
    """Rows are basis coordinates of the differentials ``df(x)`` (Jacobian)."""
    return np.array([ctx.gram @ ctx.coords(f.gradient(x)) for f in fns])
