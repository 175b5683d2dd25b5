"""Matrix realization of sl_n(C) and SL_n(C).

Algebra elements are complex ``(n, n)`` arrays with zero trace, group elements
are complex ``(n, n)`` arrays with unit determinant.  A :class:`LieContext`
carries the fixed basis, the invariant form and the numerical tolerances that
every other module reads.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

FormKind = Literal["trace_form", "killing_form"]
SampleKind = Literal["generic", "regular_semisimple", "group"]


class LieError(ValueError):
    """Base class for refused numerical decisions."""


class DimensionMismatch(LieError):
    pass


class SingularElement(LieError):
    pass


class AmbiguousRank(LieError):
    """Singular values straddle the rank threshold without a clear gap."""

    def __init__(self, message, gap_ratio):
        super().__init__(message)
        self.gap_ratio = gap_ratio


@dataclass(frozen=True)
class Tolerances:
    """Named numerical thresholds.  Every field can be overridden from the CLI."""

    rank: float = 1e-8
    gap: float = 1e3
    cluster: float = 1e-7
    cluster_band: float = 1e-4
    trace: float = 1e-10
    det: float = 1e-12
    gap_floor: float = 0.5
    structure: float = 1e-9
    triple: float = 1e-12
    exp_homomorphism: float = 1e-10
    kostant: float = 1e-10
    kostant_agree: float = 1e-8
    bracket: float = 1e-8
    bracket_down: float = 1e-9
    moment: float = 1e-8
    isotropy: float = 1e-9
    antisym: float = 1e-12
    nondegeneracy: float = 1e-8
    cond_max: float = 1e12
    conjugator: float = 1e-7
    closedness: float = 1e-9
    fd_rel: float = 1e-6
    drift: float = 1e-6
    local_error: float = 1e-6
    independence_fraction: float = 0.99

    def override(self, **kw) -> "Tolerances":
        unknown = set(kw) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in kw.items()})


def _sl_basis(n: int) -> np.ndarray:
    # Off-diagonal units followed by orthonormal traceless diagonals, so the
    # basis is orthonormal for the Frobenius product tr(a^T b).
    mats = []
    for i in range(n):
        for j in range(n):
            if i != j:
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1.0
                mats.append(e)
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -k
        mats.append(np.diag(d / np.sqrt(k * (k + 1))).astype(complex))
    return np.array(mats)


@dataclass(frozen=True, eq=False)
class LieContext:
    n: int
    form_kind: FormKind = "trace_form"
    tol: Tolerances = field(default_factory=Tolerances)
    basis: np.ndarray = field(init=False, repr=False)
    structure: np.ndarray = field(init=False, repr=False)
    gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.form_kind not in ("trace_form", "killing_form"):
            raise ValueError(f"unknown form kind {self.form_kind!r}")
        basis = _sl_basis(self.n)
        object.__setattr__(self, "basis", basis)
        # structure[k, i, j] = k-th coordinate of [b_i, b_j]
        prods = np.einsum("iab,jbc->ijac", basis, basis)
        brackets = prods - prods.transpose(1, 0, 2, 3)
        structure = np.einsum("kab,ijab->kij", basis, brackets)
        object.__setattr__(self, "structure", structure)
        gram = np.array([[pair(self, a, b) for b in basis] for a in basis])
        object.__setattr__(self, "gram", gram)
        if np.linalg.cond(gram) > 1e10:
            raise LieError("Gram matrix of the invariant form is singular")

    @property
    def dim(self) -> int:
        return self.n * self.n - 1

    @property
    def rank(self) -> int:
        return self.n - 1

    @property
    def degrees(self) -> list[int]:
        return list(range(2, self.n + 1))

    @property
    def form_scale(self) -> float:
        """Ratio between the active form and the trace form (1 or 2n)."""
        return 1.0 if self.form_kind == "trace_form" else 2.0 * self.n

    def with_tolerances(self, **kw) -> "LieContext":
        return LieContext(self.n, self.form_kind, self.tol.override(**kw))

    def coords(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("kab,ab->k", self.basis, x)

    def from_coords(self, c: np.ndarray) -> np.ndarray:
        return np.einsum("k,kab->ab", np.asarray(c, dtype=complex), self.basis)


def make_context(n: int, form: str = "trace_form", **tolerances) -> LieContext:
    form = {"trace": "trace_form", "killing": "killing_form"}.get(form, form)
    return LieContext(n, form, Tolerances().override(**tolerances))


def _check_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"incompatible shapes {a.shape} and {b.shape}")
    return a, b


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = _check_pair(a, b)
    return a @ b - b @ a


def ad_matrix(ctx: LieContext, x: np.ndarray) -> np.ndarray:
    """Matrix of ``y -> [x, y]`` in ``ctx.basis`` coordinates."""
    if np.shape(x) != (ctx.n, ctx.n):
        raise DimensionMismatch(f"expected {(ctx.n, ctx.n)}, got {np.shape(x)}")
    return np.einsum("kij,i->kj", ctx.structure, ctx.coords(x))


def trace_pair(x, y) -> complex:
    return complex(np.sum(x * np.transpose(y)))


def pair(ctx: LieContext, x: np.ndarray, y: np.ndarray) -> complex:
    x, y = _check_pair(x, y)
    if ctx.form_kind == "trace_form":
        return trace_pair(x, y)
    return complex(np.trace(ad_matrix(ctx, x) @ ad_matrix(ctx, y)))


def flat(ctx: LieContext, x: np.ndarray) -> np.ndarray:
    """Covector ``pair(x, .)`` as its values on the basis."""
    return ctx.gram @ ctx.coords(x)


def sharp(ctx: LieContext, alpha: np.ndarray) -> np.ndarray:
    return ctx.from_coords(np.linalg.solve(ctx.gram, alpha))


def group_exp(y: np.ndarray) -> np.ndarray:
    g = scipy.linalg.expm(np.asarray(y, dtype=complex))
    return normalize_det(g)


def normalize_det(g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    d = np.linalg.det(g)
    if d == 0:
        raise SingularElement("cannot normalize a singular matrix")
    return g / d ** (1.0 / n)


def adjoint_action(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    g, x = _check_pair(g, x)
    if np.linalg.cond(g) > 1e13:
        raise SingularElement("group element is numerically singular")
    return g @ np.linalg.solve(g.T, x.T).T


def adjoint_inverse_action(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``Ad_{g^{-1}}(x) = g^{-1} x g``."""
    g, x = _check_pair(g, x)
    if np.linalg.cond(g) > 1e13:
        raise SingularElement("group element is numerically singular")
    return np.linalg.solve(g, x @ g)


class RankInfo(NamedTuple):
    rank: int
    singular_values: np.ndarray
    gap_ratio: float


def numerical_rank(a: np.ndarray, rtol: float, atol: float | None = None) -> RankInfo:
    """Rank with threshold ``rtol * sigma_max`` (or ``atol`` when given).

    ``gap_ratio`` is the ratio of the smallest retained singular value to
    the largest discarded one; ``inf`` when nothing straddles the threshold.
    """
    s = np.linalg.svd(np.atleast_2d(a), compute_uv=False)
    if s.size == 0:
        return RankInfo(0, s, np.inf)
    thresh = atol if atol is not None else rtol * s[0]
    r = int(np.sum(s > thresh))
    if 0 < r < s.size and s[r] > 0:
        gap = float(s[r - 1] / s[r])
    else:
        gap = np.inf
    return RankInfo(r, s, gap)


@dataclass(frozen=True, eq=False)
class CentralizerBasis:
    base_point: np.ndarray
    vectors: np.ndarray
    tol_used: float
    gap_ratio: float = np.inf

    @property
    def dim(self) -> int:
        return len(self.vectors)


def centralizer(ctx: LieContext, x: np.ndarray, tol: float | None = None) -> CentralizerBasis:
    tol = ctx.tol.rank if tol is None else tol
    ad = ad_matrix(ctx, x)
    _, s, vh = np.linalg.svd(ad)
    if s[0] == 0:
        return CentralizerBasis(x, ctx.basis.copy(), tol)
    r = int(np.sum(s > tol * s[0]))
    gap = float(s[r - 1] / s[r]) if r < s.size and s[r] > 0 else np.inf
    if gap < ctx.tol.gap:
        raise AmbiguousRank(f"centralizer dimension ambiguous (gap ratio {gap:.3g})", gap)
    kernel = vh[r:].conj()
    if len(kernel) < ctx.rank:
        raise LieError(f"centralizer dimension {len(kernel)} below rank {ctx.rank}")
    vectors = np.einsum("mk,kab->mab", kernel, ctx.basis)
    return CentralizerBasis(x, vectors, tol, gap)


@dataclass(frozen=True)
class Classification:
    """``None`` in a boolean field means the decision was refused as uncertain."""

    is_regular: bool | None
    is_semisimple: bool | None
    centralizer_dim: int | None
    eigenvalue_clusters: tuple = ()

    @property
    def uncertain(self) -> bool:
        return self.is_regular is None or self.is_semisimple is None

    @property
    def is_nilpotent(self) -> bool | None:
        if self.is_semisimple is None:
            return None
        return len(self.eigenvalue_clusters) == 1 and self.eigenvalue_clusters[0][0] == 0


def cluster_eigenvalues(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of indices whose values lie within ``tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def classify(ctx: LieContext, x: np.ndarray, tol: float | None = None) -> Classification:
    tol = ctx.tol.rank if tol is None else tol
    try:
        cdim = centralizer(ctx, x, tol).dim
        regular = cdim == ctx.rank
    except AmbiguousRank:
        cdim, regular = None, None

    scale = max(1.0, float(np.linalg.norm(x)))
    lam = np.linalg.eigvals(x)
    groups = cluster_eigenvalues(lam, ctx.tol.cluster * scale)
    centers = [complex(np.mean(lam[g])) for g in groups]
    clusters = []
    for c, g in zip(centers, groups):
        c = 0j if abs(c) <= ctx.tol.cluster * scale else c
        clusters.append((c, len(g)))
    clusters = sorted(clusters, key=lambda cm: (cm[0].real, cm[0].imag))

    sep = min(
        (abs(a - b) for i, a in enumerate(centers) for b in centers[i + 1 :]),
        default=np.inf,
    )
    if sep < ctx.tol.cluster_band * scale:
        return Classification(regular, None, cdim, tuple(clusters))
    semisimple = True
    eye = np.eye(ctx.n)
    for c, m in clusters:
        r = numerical_rank(x - c * eye, tol, atol=tol * scale).rank
        if r != ctx.n - m:
            semisimple = False
            break
    return Classification(regular, semisimple, cdim, tuple(clusters))


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_algebra_element(ctx: LieContext, rng, norm: float | None = None) -> np.ndarray:
    x = ctx.from_coords(_complex_normal(rng, ctx.dim))
    if norm is not None:
        x *= norm / np.linalg.norm(x)
    return x


def sample(ctx: LieContext, seed, kind: SampleKind = "generic", bound: float = 1.0) -> np.ndarray:
    """Seeded random element.

    ``seed`` may be an integer or a ``numpy.random.Generator`` (consumed in
    place, which is how verification sweeps draw many points from one seed).
    """
    rng = np.random.default_rng(seed)
    if kind == "generic":
        return random_algebra_element(ctx, rng)
    if kind == "group":
        y = random_algebra_element(ctx, rng, norm=bound * rng.uniform(0.1, 1.0))
        return group_exp(y)
    if kind == "regular_semisimple":
        floor = ctx.tol.gap_floor
        for _ in range(1000):
            lam = 2.0 * _complex_normal(rng, ctx.n)
            lam -= lam.mean()
            gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(ctx.n, np.inf))
            if gaps.min() >= floor:
                break
        else:  # pragma: no cover - probability is negligible
            raise RuntimeError("failed to draw separated eigenvalues")
        g = sample(ctx, rng, "group", bound=bound)
        return adjoint_action(g, np.diag(lam))
    raise ValueError(f"unknown sample kind {kind!r}")
