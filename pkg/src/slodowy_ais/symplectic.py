"""The phase space ``G x S_reg`` with its restricted holomorphic symplectic form.

Tangent vectors at ``(g, x)`` are written in right trivialization as pairs
``(y, z)``: ``y`` in the Lie algebra (the curve ``exp(t y) g``) and ``z`` in
the span of the slice basis.  Their coordinate vectors have length
``dim + rank``: basis coordinates of ``y`` followed by slice coordinates of
``z``.  Covectors use the same layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .functions import LinearFunction, PolyFunction
from .lie_core import (
    CentralizerBasis,
    LieContext,
    LieError,
    adjoint_action,
    adjoint_inverse_action,
    bracket,
    centralizer,
    classify,
    flat,
    group_exp,
    numerical_rank,
    pair,
    random_algebra_element,
    sample,
)
from .slodowy import SlodowySlice, conjugator, slice_representative


class NearSingularOmega(LieError):
    pass


@dataclass(frozen=True, eq=False)
class PhasePoint:
    slc: SlodowySlice
    g: np.ndarray
    coords: np.ndarray
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=complex))
        object.__setattr__(self, "x", self.slc.point(self.coords))
        err = abs(np.linalg.det(self.g) - 1)
        if err > 1e3 * self.slc.ctx.tol.det:
            raise LieError(f"group component has |det - 1| = {err:.3g}")

    @property
    def ctx(self) -> LieContext:
        return self.slc.ctx


def phase_point(slc: SlodowySlice, g=None, coords=None) -> PhasePoint:
    g = np.eye(slc.ctx.n, dtype=complex) if g is None else np.asarray(g, dtype=complex)
    coords = np.zeros(slc.rank) if coords is None else coords
    return PhasePoint(slc, g, coords)


def random_phase_point(slc: SlodowySlice, seed, g_bound=1.0, c_bound=1.0) -> PhasePoint:
    rng = np.random.default_rng(seed)
    g = sample(slc.ctx, rng, "group", bound=g_bound)
    u = rng.standard_normal(slc.rank) + 1j * rng.standard_normal(slc.rank)
    c = u / np.linalg.norm(u) * rng.uniform(0, c_bound)
    return PhasePoint(slc, g, c)


@dataclass(frozen=True, eq=False)
class TangentVector:
    y: np.ndarray
    z: np.ndarray

    def to_vector(self, slc: SlodowySlice) -> np.ndarray:
        return np.concatenate([slc.ctx.coords(self.y), slc.tangent_coords(self.z)])

    @classmethod
    def from_vector(cls, slc: SlodowySlice, v) -> "TangentVector":
        v = np.asarray(v, dtype=complex)
        dim = slc.ctx.dim
        z = np.einsum("k,kab->ab", v[dim:], slc.basis)
        return cls(slc.ctx.from_coords(v[:dim]), z)

    def norm(self) -> float:
        return float(np.sqrt(np.linalg.norm(self.y) ** 2 + np.linalg.norm(self.z) ** 2))


def phi(p: PhasePoint, check: bool = False) -> np.ndarray:
    """``(g, x) -> -Ad_{g^{-1}}(x)``."""
    out = -adjoint_inverse_action(p.g, p.x)
    if check and classify(p.ctx, out).is_regular is not True:
        raise LieError("phi(p) is not regular")
    return out


def d_phi(p: PhasePoint, v: TangentVector) -> np.ndarray:
    return adjoint_inverse_action(p.g, bracket(v.y, p.x) - v.z)


def d_phi_matrix(p: PhasePoint) -> np.ndarray:
    """``dim x (dim + rank)`` matrix of ``d_phi`` in coordinates."""
    ctx, slc = p.ctx, p.slc
    cols = [ctx.coords(adjoint_inverse_action(p.g, bracket(b, p.x))) for b in ctx.basis]
    cols += [-ctx.coords(adjoint_inverse_action(p.g, z)) for z in slc.basis]
    return np.array(cols).T


def omega(p: PhasePoint, v1: TangentVector, v2: TangentVector) -> complex:
    ctx = p.ctx
    return (
        pair(ctx, v1.y, v2.z)
        - pair(ctx, v2.y, v1.z)
        - pair(ctx, p.x, bracket(v1.y, v2.y))
    )


def _slice_pairing(slc: SlodowySlice) -> np.ndarray:
    # [i, k] = pair(b_i, eta^k); independent of the point
    ctx = slc.ctx
    return np.array([flat(ctx, z) for z in slc.basis]).T


def omega_matrix(p: PhasePoint) -> np.ndarray:
    """Gram matrix ``Omega[a, b] = omega(e_a, e_b)`` on ``g + Z(eta)``."""
    ctx, slc = p.ctx, p.slc
    dim, r = ctx.dim, slc.rank
    yz = _slice_pairing(slc)
    out = np.zeros((dim + r, dim + r), dtype=complex)
    out[:dim, :dim] = -np.einsum("k,kij->ij", flat(ctx, p.x), ctx.structure)
    out[:dim, dim:] = yz
    out[dim:, :dim] = -yz.T
    return out


def gradient_covector(p: PhasePoint, u: np.ndarray) -> np.ndarray:
    """Differential of ``f o phi`` at ``p`` given ``u = grad f(phi(p))``.

    ``d(f o phi)(y, z) = pair(Ad_g u, [y, x] - z)``.
    """
    ctx = p.ctx
    w = adjoint_action(p.g, u)
    ypart = flat(ctx, bracket(p.x, w))
    zpart = -np.array([pair(ctx, w, z) for z in p.slc.basis])
    return np.concatenate([ypart, zpart])


class Observable:
    """A function on the phase space with its exact differential."""

    def __init__(
        self,
        evaluate: Callable[[PhasePoint], complex],
        differential: Callable[[PhasePoint], np.ndarray],
        tag: str = "custom",
        label: str = "F",
        function: PolyFunction | None = None,
    ):
        self._eval = evaluate
        self._diff = differential
        self.tag = tag
        self.label = label
        self.function = function

    def eval(self, p: PhasePoint) -> complex:
        return complex(self._eval(p))

    def diff(self, p: PhasePoint) -> np.ndarray:
        return np.asarray(self._diff(p), dtype=complex)

    def __mul__(self, other: "Observable") -> "Observable":
        return Observable(
            lambda p: self.eval(p) * other.eval(p),
            lambda p: self.eval(p) * other.diff(p) + other.eval(p) * self.diff(p),
            label=f"({self.label})*({other.label})",
        )

    def combine(self, a, other: "Observable", b) -> "Observable":
        """``a * self + b * other``."""
        return Observable(
            lambda p: a * self.eval(p) + b * other.eval(p),
            lambda p: a * self.diff(p) + b * other.diff(p),
            label=f"{a}*{self.label}+{b}*{other.label}",
        )

    def __repr__(self):
        return f"<Observable {self.label} [{self.tag}]>"


def pullback(f: PolyFunction, tag: str | None = None) -> Observable:
    """``f o phi`` as an observable."""
    if tag is None:
        tag = "coordinate" if f.label.startswith("theta") else "pullback"
    return Observable(
        lambda p: f.value(phi(p)),
        lambda p: gradient_covector(p, f.gradient(phi(p))),
        tag=tag,
        label=f"{f.label} o Phi",
        function=f,
    )


def constant_observable(slc: SlodowySlice, c=1.0) -> Observable:
    size = slc.ctx.dim + slc.rank
    return Observable(lambda p: c, lambda p: np.zeros(size), label=f"const({c})")


def moment_component(y: np.ndarray, ctx: LieContext) -> Observable:
    """``H_y = pair(phi, y)``."""
    return pullback(LinearFunction(ctx, y, label="H_y"))


def central_difference(obs: Observable, p: PhasePoint, v: TangentVector, step=1e-5) -> complex:
    """Derivative of ``obs`` along the curve ``(exp(t y) g, x + t z)``."""
    dc = p.slc.tangent_coords(v.z)

    def at(t):
        return obs.eval(PhasePoint(p.slc, group_exp(t * v.y) @ p.g, p.coords + t * dc))

    return (at(step) - at(-step)) / (2 * step)


def field_vector(p: PhasePoint, alpha: np.ndarray, om: np.ndarray | None = None) -> np.ndarray:
    """Coordinates of ``v`` with ``omega(v, w) = alpha(w)`` for all ``w``."""
    om = omega_matrix(p) if om is None else om
    if np.linalg.cond(om) > p.ctx.tol.cond_max:
        raise NearSingularOmega("restricted symplectic form is near-singular here")
    return np.linalg.solve(om.T, alpha)


def hamiltonian_field(p: PhasePoint, obs: Observable) -> TangentVector:
    return TangentVector.from_vector(p.slc, field_vector(p, obs.diff(p)))


def bracket_up(p: PhasePoint, f: Observable, h: Observable, om=None) -> complex:
    om = omega_matrix(p) if om is None else om
    vf = field_vector(p, f.diff(p), om)
    vh = field_vector(p, h.diff(p), om)
    return complex(vf @ om @ vh)


def lie_poisson(ctx: LieContext, f: PolyFunction, h: PolyFunction, y: np.ndarray) -> complex:
    """``{f, h}(y) = pair(y, [grad f(y), grad h(y)])``."""
    return pair(ctx, y, bracket(f.gradient(y), h.gradient(y)))


def _bracket_scale(ctx, y, f, h):
    return max(
        1.0,
        ctx.form_scale
        * np.linalg.norm(y)
        * np.linalg.norm(f.gradient(y))
        * np.linalg.norm(h.gradient(y)),
    )


def verify_poisson_morphism(p: PhasePoint, f: PolyFunction, h: PolyFunction) -> float:
    """Relative disagreement between the upstairs and downstairs brackets.

    Normalized by ``max(1, form_scale |phi| |grad f| |grad h|)``.
    """
    y = phi(p)
    up = bracket_up(p, pullback(f), pullback(h))
    down = lie_poisson(p.ctx, f, h, y)
    return float(abs(up - down) / _bracket_scale(p.ctx, y, f, h))


def verify_moment_map(p: PhasePoint, y: np.ndarray) -> float:
    """Relative distance between the field of ``H_y`` and ``(-Ad_g y, 0)``."""
    ctx = p.ctx
    got = field_vector(p, moment_component(y, ctx).diff(p))
    expected = np.concatenate([-ctx.coords(adjoint_action(p.g, y)), np.zeros(p.slc.rank)])
    return float(np.linalg.norm(got - expected) / max(1.0, np.linalg.norm(expected)))


def isotropy_residual(ctx: LieContext, tilde_x: np.ndarray, cb: CentralizerBasis) -> float:
    """``max |pair(tilde_x, [v_i, v_j])|`` over centralizer pairs, relative to ``|tilde_x|``."""
    vs = cb.vectors
    worst = 0.0
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            worst = max(worst, abs(pair(ctx, tilde_x, bracket(vs[i], vs[j]))))
    return worst / max(1.0, float(np.linalg.norm(tilde_x)))


def closedness_residual(p: PhasePoint, u: TangentVector, v: TangentVector, w: TangentVector,
                        step: float = 1e-3) -> float:
    """Cartan-formula value of ``d omega(U, V, W)`` for right-invariant fields.

    The fields are constant in the trivialization; the Lie bracket of the
    right-invariant fields for ``a`` and ``b`` is the field for ``-[a, b]``.
    Derivative terms are central differences along the flow of the first field.
    """
    slc = p.slc

    def moved(t, a: TangentVector):
        return PhasePoint(slc, group_exp(t * a.y) @ p.g, p.coords + t * slc.tangent_coords(a.z))

    def deriv(a, b, c):
        return (omega(moved(step, a), b, c) - omega(moved(-step, a), b, c)) / (2 * step)

    def lie(a, b):
        return TangentVector(-bracket(a.y, b.y), np.zeros_like(a.z))

    total = (
        deriv(u, v, w) - deriv(v, u, w) + deriv(w, u, v)
        - omega(p, lie(u, v), w) + omega(p, lie(u, w), v) - omega(p, lie(v, w), u)
    )
    scale = max(1.0, (1 + np.linalg.norm(p.x)) * u.norm() * v.norm() * w.norm())
    return float(abs(total) / scale)


def random_tangent(slc: SlodowySlice, seed) -> TangentVector:
    rng = np.random.default_rng(seed)
    y = random_algebra_element(slc.ctx, rng)
    s = rng.standard_normal(slc.rank) + 1j * rng.standard_normal(slc.rank)
    return TangentVector(y, np.einsum("k,kab->ab", s, slc.basis))


FIBER_KINDS = ("torus", "nilpotent_type", "mixed", "uncertain")


@dataclass(frozen=True, eq=False)
class FiberReport:
    base: np.ndarray
    tilde_x: np.ndarray
    tilde_coords: np.ndarray
    centralizer: CentralizerBasis
    fiber_dim: int
    kind: str
    component_count_theoretical: int | str
    isotropy_residual: float

    def to_dict(self) -> dict:
        from .serialize import coords_to_json, matrix_to_json

        return {
            "base": matrix_to_json(self.base),
            "tilde_x": matrix_to_json(self.tilde_x),
            "tilde_coords": coords_to_json(self.tilde_coords),
            "centralizer": {
                "dim": self.centralizer.dim,
                "tol_used": self.centralizer.tol_used,
                "vectors": [matrix_to_json(v) for v in self.centralizer.vectors],
            },
            "fiber_dim": self.fiber_dim,
            "kind": self.kind,
            "component_count_theoretical": self.component_count_theoretical,
            "isotropy_residual": self.isotropy_residual,
        }


def fiber_report(slc: SlodowySlice, x: np.ndarray) -> FiberReport:
    """Describe the fibre of ``phi`` over a regular element ``x``."""
    ctx = slc.ctx
    cls = classify(ctx, x)
    tilde_x, c = slice_representative(slc, x)
    cb = centralizer(ctx, tilde_x)
    if cls.is_semisimple is None:
        kind, count = "uncertain", "unknown"
    elif cls.is_semisimple:
        kind, count = "torus", 1
    elif cls.is_nilpotent:
        # |Z(SL_n)| = n components, each an affine space
        kind, count = "nilpotent_type", ctx.n
    else:
        kind, count = "mixed", "unknown"
    return FiberReport(
        base=x,
        tilde_x=tilde_x,
        tilde_coords=c,
        centralizer=cb,
        fiber_dim=cb.dim,
        kind=kind,
        component_count_theoretical=count,
        isotropy_residual=isotropy_residual(ctx, tilde_x, cb),
    )


def fiber_membership_residual(slc: SlodowySlice, x: np.ndarray, seed=0, count: int = 20) -> float:
    """Max relative ``|phi(h g, tilde_x) - x|`` over random ``h`` in the stabilizer of ``tilde_x``."""
    ctx = slc.ctx
    rng = np.random.default_rng(seed)
    tilde_x, c = slice_representative(slc, x)
    g = conjugator(ctx, tilde_x, -x)
    cb = centralizer(ctx, tilde_x)
    worst = 0.0
    for _ in range(count):
        coef = rng.standard_normal(cb.dim) + 1j * rng.standard_normal(cb.dim)
        h = group_exp(np.einsum("m,mab->ab", 0.5 * coef, cb.vectors))
        val = phi(PhasePoint(slc, h @ g, c))
        worst = max(worst, float(np.linalg.norm(val - x)))
    return worst / max(1.0, float(np.linalg.norm(x)))


@dataclass
class AISCertificate:
    n: int
    dim_phase_space: int
    dim_group: int
    rank: int
    dimension_identity: bool
    samples: int
    regular_failures: int
    uncertain: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.dimension_identity and self.regular_failures == 0 and self.uncertain == 0


def ais_certificate(slc: SlodowySlice, samples: int = 1000, seed: int = 0) -> AISCertificate:
    """Check ``dim X = dim G + rk G`` and that sampled moment-map values are regular."""
    ctx = slc.ctx
    dim_x = ctx.dim + slc.rank
    rng = np.random.default_rng(seed)
    failures = uncertain = 0
    for _ in range(samples):
        reg = classify(ctx, phi(random_phase_point(slc, rng))).is_regular
        if reg is None:
            uncertain += 1
        elif not reg:
            failures += 1
    return AISCertificate(
        n=ctx.n,
        dim_phase_space=dim_x,
        dim_group=ctx.dim,
        rank=ctx.rank,
        dimension_identity=dim_x == ctx.dim + ctx.rank,
        samples=samples,
        regular_failures=failures,
        uncertain=uncertain,
        seed=seed,
    )


def submersion_rank(p: PhasePoint) -> int:
    return numerical_rank(d_phi_matrix(p), p.ctx.tol.rank).rank
