"""The two explicit integrable systems on ``G x S_reg`` and their checks.

* ``invariant_pullback``: the invariants ``f_i o phi`` together with
  ``dim - rank`` linear coordinates ``theta_j o phi``; rank ``rank``.
* ``mishchenko_fomenko``: argument-shifted invariants ``(d_beta)^j f_i o phi``
  for a regular semisimple ``beta``; ``(dim + rank) / 2`` commuting functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .functions import (
    ArgumentShift,
    ConstantFunction,
    PolyFunction,
    coordinate_function,
    invariants,
    stacked_gradients,
)
from .lie_core import LieContext, LieError, classify, numerical_rank, random_algebra_element, sample
from .serialize import matrix_to_json
from .slodowy import SlodowySlice, conjugator, slice_representative
from .symplectic import (
    Observable,
    PhasePoint,
    _bracket_scale,
    field_vector,
    lie_poisson,
    omega_matrix,
    phi,
    pullback,
)


class SystemRejected(LieError):
    pass


@dataclass(eq=False)
class IntegrableSystem:
    slc: SlodowySlice
    functions: list[PolyFunction]
    declared_rank: int
    kind: str
    beta: np.ndarray | None = None
    coordinate_selection: list[int] = field(default_factory=list)
    minor_columns: list[int] = field(default_factory=list)
    include_constants: bool = False
    observables: list[Observable] = field(init=False)

    def __post_init__(self):
        self.observables = [pullback(f) for f in self.functions]
        phase_dim = self.ctx.dim + self.slc.rank
        if 2 * self.declared_rank > phase_dim:
            raise SystemRejected("declared rank exceeds half the phase-space dimension")

    @property
    def ctx(self) -> LieContext:
        return self.slc.ctx

    @property
    def count(self) -> int:
        return len(self.functions)

    def manifest(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.ctx.n,
            "form": self.ctx.form_kind,
            "beta": None if self.beta is None else matrix_to_json(self.beta),
            "coordinate_selection": list(self.coordinate_selection),
            "minor_columns": list(self.minor_columns),
            "count": self.count,
            "declared_rank": self.declared_rank,
            "include_constants": self.include_constants,
            "functions": [f.label for f in self.functions],
        }


def build_invariant_pullback(slc: SlodowySlice, probe: np.ndarray) -> IntegrableSystem:
    """Invariants plus the linear coordinates not needed for a nonzero minor at ``probe``.

    The ``rank`` columns of the invariant Jacobian carrying the nonvanishing
    minor come from a column-pivoted QR factorization at ``probe``.
    """
    ctx = slc.ctx
    if classify(ctx, probe).is_regular is not True:
        raise SystemRejected("probe is not regular")
    fs = invariants(ctx)
    jac = stacked_gradients(ctx, fs, probe)
    if numerical_rank(jac, ctx.tol.rank).rank != ctx.rank:
        raise SystemRejected("invariant differentials are dependent at the probe")
    _, _, piv = scipy.linalg.qr(jac, pivoting=True)
    minor = sorted(int(i) for i in piv[: ctx.rank])
    keep = [j for j in range(ctx.dim) if j not in minor]
    fns = list(fs) + [coordinate_function(ctx, j) for j in keep]
    return IntegrableSystem(
        slc, fns, ctx.rank, "invariant_pullback",
        coordinate_selection=keep, minor_columns=minor,
    )


def mf_functions(ctx: LieContext, beta, include_constants: bool = False) -> list[PolyFunction]:
    out = []
    for f in invariants(ctx):
        top = f.degree if include_constants else f.degree - 1
        out.extend(ArgumentShift(f, beta, j) for j in range(top + 1))
    return out


def build_mf(slc: SlodowySlice, beta: np.ndarray, include_constants: bool = False) -> IntegrableSystem:
    ctx = slc.ctx
    cls = classify(ctx, beta)
    if cls.is_regular is not True or cls.is_semisimple is not True:
        raise SystemRejected("shift direction must be regular semisimple")
    fns = mf_functions(ctx, beta, include_constants)
    return IntegrableSystem(
        slc, fns, (ctx.dim + ctx.rank) // 2, "mishchenko_fomenko",
        beta=np.asarray(beta, dtype=complex), include_constants=include_constants,
    )


def random_shift(ctx: LieContext, seed) -> np.ndarray:
    """Unit-norm regular semisimple shift direction."""
    beta = sample(ctx, seed, "regular_semisimple")
    return beta / np.linalg.norm(beta)


def bracket_pairs(system: IntegrableSystem) -> list[tuple[int, int]]:
    m = system.count
    if system.kind == "invariant_pullback":
        return [(a, b) for a in range(system.declared_rank) for b in range(m) if a != b]
    return [(a, b) for a in range(m) for b in range(a + 1, m)]


@dataclass
class CommutativityReport:
    points: int
    pairs: int
    max_up: float
    max_down: float
    worst_pair: tuple[int, int] | None

    @property
    def max_residual(self) -> float:
        return max(self.max_up, self.max_down)

    def to_dict(self):
        return dict(self.__dict__, max_residual=self.max_residual)


def verify_commutativity(system: IntegrableSystem, samples: list[PhasePoint]) -> CommutativityReport:
    """Relative bracket residuals from both engines.

    Upstairs: ``omega`` of Hamiltonian fields on ``G x S_reg``.  Downstairs:
    the Lie-Poisson bracket at ``phi(p)``.  Each residual is divided by
    ``max(1, form_scale |phi| |grad f| |grad h|)``.
    """
    ctx = system.ctx
    pairs = bracket_pairs(system)
    max_up = max_down = 0.0
    worst = None
    for p in samples:
        y = phi(p)
        om = omega_matrix(p)
        fields = [field_vector(p, o.diff(p), om) for o in system.observables]
        for a, b in pairs:
            fa, fb = system.functions[a], system.functions[b]
            scale = _bracket_scale(ctx, y, fa, fb)
            up = abs(fields[a] @ om @ fields[b]) / scale
            down = abs(lie_poisson(ctx, fa, fb, y)) / scale
            if max(up, down) > max(max_up, max_down):
                worst = (a, b)
            max_up, max_down = max(max_up, up), max(max_down, down)
    return CommutativityReport(len(samples), len(pairs), max_up, max_down, worst)


@dataclass
class IndependenceReport:
    points: int
    count: int
    ranks: list[int]
    min_singular_values: list[float]

    @property
    def full_rank_fraction(self) -> float:
        if not self.ranks:
            return 0.0
        return float(np.mean([r == self.count for r in self.ranks]))

    @property
    def failures(self) -> list[int]:
        return [i for i, r in enumerate(self.ranks) if r < self.count]

    def quantiles(self) -> dict:
        if not self.min_singular_values:
            return {}
        q = np.quantile(self.min_singular_values, [0.0, 0.01, 0.5, 1.0])
        return dict(zip(["min", "q01", "median", "max"], map(float, q)))

    def to_dict(self):
        return {
            "points": self.points,
            "count": self.count,
            "ranks": self.ranks,
            "full_rank_fraction": self.full_rank_fraction,
            "min_singular_value_quantiles": self.quantiles(),
            "failure_indices": self.failures,
        }


def differential_rank(system: IntegrableSystem, p: PhasePoint) -> tuple[int, float]:
    """Numerical rank of the stacked differentials and their smallest singular value.

    Rows are scaled to unit norm first.  Rows at roundoff level relative to
    the largest one (differentials of constants) are zeroed rather than
    blown up to unit noise.
    """
    d = np.array([o.diff(p) for o in system.observables])
    norms = np.linalg.norm(d, axis=1, keepdims=True)
    live = norms > system.ctx.tol.rank * max(1.0, float(norms.max()))
    d = np.where(live, d / np.where(live, norms, 1.0), 0.0)
    info = numerical_rank(d, system.ctx.tol.rank)
    return info.rank, float(info.singular_values[-1])


def verify_independence(system: IntegrableSystem, samples: list[PhasePoint]) -> IndependenceReport:
    ranks, svs = [], []
    for p in samples:
        r, s = differential_rank(system, p)
        ranks.append(r)
        svs.append(s)
    return IndependenceReport(len(samples), system.count, ranks, svs)


@dataclass
class LocusRow:
    gradient_rank: int
    is_regular: bool | None
    consistent: bool | None


def regularity_locus_probe(ctx: LieContext, points) -> dict:
    """Compare the rank of the invariant Jacobian with the regularity test."""
    fs = invariants(ctx)
    rows = []
    for x in points:
        jac = stacked_gradients(ctx, fs, x)
        norms = np.linalg.norm(jac, axis=1, keepdims=True)
        jac = jac / np.where(norms > 1e-300, norms, 1.0)
        r = numerical_rank(jac, ctx.tol.rank, atol=ctx.tol.rank).rank
        reg = classify(ctx, x).is_regular
        ok = None if reg is None else ((r == ctx.rank) == reg)
        rows.append(LocusRow(r, reg, ok))
    decided = [r for r in rows if r.consistent is not None]
    return {
        "rows": rows,
        "excluded_uncertain": len(rows) - len(decided),
        "all_consistent": all(r.consistent for r in decided),
    }


def preimage_point(slc: SlodowySlice, x: np.ndarray) -> PhasePoint:
    """A phase point with ``phi(p) = x`` for regular semisimple ``x``."""
    tilde_x, c = slice_representative(slc, x)
    g = conjugator(slc.ctx, tilde_x, -x)
    return PhasePoint(slc, g, c)


def _minor_zero(system: IntegrableSystem, rng) -> np.ndarray:
    # Root of rho(x0 + s v) = det(J[:, minor](x0 + s v)), a polynomial in s.
    ctx = system.ctx
    fs = invariants(ctx)
    cols = system.minor_columns
    x0 = sample(ctx, rng, "regular_semisimple")
    v = random_algebra_element(ctx, rng, norm=1.0)
    deg = sum(f.degree - 1 for f in fs)
    nodes = np.exp(2j * np.pi * np.arange(deg + 1) / (deg + 1))
    vals = [np.linalg.det(stacked_gradients(ctx, fs, x0 + s * v)[:, cols]) for s in nodes]
    coef = np.fft.fft(vals) / (deg + 1)  # coefficients of s^0..s^deg
    roots = np.roots(coef[::-1])
    s = roots[np.argmin(np.abs(roots))]
    return x0 + s * v


def degenerate_point(system: IntegrableSystem, seed=0) -> PhasePoint:
    """A phase point off the dense open set where the differentials are independent.

    Mishchenko-Fomenko: ``phi(p) = beta``.  Invariant pullback: ``phi(p)`` on
    the zero set of the selected minor.
    """
    rng = np.random.default_rng(seed)
    if system.kind == "mishchenko_fomenko":
        return preimage_point(system.slc, system.beta)
    for _ in range(20):
        x = _minor_zero(system, rng)
        cls = classify(system.ctx, x)
        if cls.is_regular and cls.is_semisimple:
            return preimage_point(system.slc, x)
    raise LieError("could not place a point on the degenerate locus")


def with_constant(system: IntegrableSystem, c=1.0) -> IntegrableSystem:
    """Copy of ``system`` with a constant function appended (debugging aid)."""
    return IntegrableSystem(
        system.slc, system.functions + [ConstantFunction(system.ctx, c)],
        system.declared_rank, system.kind, system.beta,
        list(system.coordinate_selection), list(system.minor_columns), system.include_constants,
    )
