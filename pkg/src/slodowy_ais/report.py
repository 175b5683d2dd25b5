"""Verification suites and the machine-readable report they produce."""

from __future__ import annotations

import datetime
import traceback
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .functions import LinearFunction, ProductFunction, directional_derivative, invariants
from .lie_core import (
    LieContext,
    ad_matrix,
    adjoint_action,
    bracket,
    centralizer,
    classify,
    group_exp,
    pair,
    random_algebra_element,
    sample,
    trace_pair,
)
from .slodowy import (
    invariant_values,
    kostant_section,
    make_slice,
    principal_triple,
    transversality_rank,
)
from .symplectic import (
    ais_certificate,
    closedness_residual,
    fiber_membership_residual,
    isotropy_residual,
    omega_matrix,
    phi,
    random_phase_point,
    random_tangent,
    submersion_rank,
    verify_moment_map,
    verify_poisson_morphism,
)
from .systems import (
    build_invariant_pullback,
    build_mf,
    degenerate_point,
    differential_rank,
    random_shift,
    regularity_locus_probe,
    verify_commutativity,
    verify_independence,
)


@dataclass
class CheckRecord:
    name: str
    anchor: str
    value: float
    threshold: float
    comparison: str  # "<=", ">=", "=="
    verdict: str = ""
    detail: str = ""

    def __post_init__(self):
        if not self.verdict:
            v, t = self.value, self.threshold
            ok = {"<=": v <= t, ">=": v >= t, "==": v == t}[self.comparison]
            self.verdict = "pass" if ok else "fail"


@dataclass
class VerificationReport:
    suite: str
    records: list[CheckRecord] = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if any(r.verdict == "error" for r in self.records):
            return "error"
        return "pass" if all(r.verdict == "pass" for r in self.records) else "fail"

    def add(self, *args, **kw) -> CheckRecord:
        rec = CheckRecord(*args, **kw)
        self.records.append(rec)
        return rec

    def extend(self, other: "VerificationReport"):
        self.records.extend(other.records)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "verdict": self.verdict,
            "environment": self.environment,
            "records": [r.__dict__ for r in self.records],
        }


def environment(ctx: LieContext, seed: int, samples: int) -> dict:
    return {
        "n": ctx.n,
        "seed": seed,
        "samples": samples,
        "form": ctx.form_kind,
        "version": __version__,
        "tolerances": dict(ctx.tol.__dict__),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _guard(report: VerificationReport, name: str, anchor: str, fn):
    try:
        fn()
    except Exception as exc:  # a suite failure must not hide the other records
        report.add(name, anchor, float("nan"), float("nan"), "<=", verdict="error",
                   detail=f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")


def suite_lie_core(ctx: LieContext, seed: int, samples: int) -> VerificationReport:
    rep = VerificationReport("lie_core")
    rng = np.random.default_rng([seed, 1])
    tol = ctx.tol

    def jacobi():
        worst = 0.0
        for _ in range(samples):
            x, y, z = (sample(ctx, rng) for _ in range(3))
            j = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
            scale = max(1.0, np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z))
            worst = max(worst, np.linalg.norm(j) / scale)
        rep.add("jacobi_identity", "Lie bracket of g", worst, tol.structure, "<=")

    def invariance():
        worst = 0.0
        for kind in ("trace_form", "killing_form"):
            c = LieContext(ctx.n, kind, tol)
            for _ in range(samples):
                x, y, z = (sample(ctx, rng) for _ in range(3))
                r = pair(c, bracket(z, x), y) + pair(c, x, bracket(z, y))
                scale = c.form_scale * max(
                    1.0, np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z)
                )
                worst = max(worst, abs(r) / scale)
        rep.add("form_ad_invariance", "invariant form on g", worst, tol.structure, "<=")

    def killing():
        kc = LieContext(ctx.n, "killing_form", tol)
        worst = 0.0
        for a in ctx.basis:
            for b in ctx.basis:
                k = np.trace(ad_matrix(kc, a) @ ad_matrix(kc, b))
                worst = max(worst, abs(k - 2 * ctx.n * trace_pair(a, b)))
        rep.add("killing_trace_proportionality", "Killing form = 2n trace form",
                worst, tol.structure, "<=")

    def centralizers():
        low = 0
        for _ in range(samples):
            if centralizer(ctx, sample(ctx, rng)).dim < ctx.rank:
                low += 1
        rep.add("centralizer_dim_at_least_rank", "dim Z(x) >= rk G", low, 0, "==")
        off = 0
        for _ in range(samples):
            if centralizer(ctx, sample(ctx, rng, "regular_semisimple")).dim != ctx.rank:
                off += 1
        rep.add("centralizer_dim_regular_semisimple", "regular elements: dim Z(x) = rk G",
                off, 0, "==")

    def exp_hom():
        worst = 0.0
        for _ in range(samples):
            a = np.diag(sample(ctx, rng).diagonal())
            b = np.diag(sample(ctx, rng).diagonal())
            a -= np.trace(a) / ctx.n * np.eye(ctx.n)
            b -= np.trace(b) / ctx.n * np.eye(ctx.n)
            lhs = group_exp(a + b)
            worst = max(worst, np.linalg.norm(lhs - group_exp(a) @ group_exp(b))
                        / max(1.0, np.linalg.norm(lhs)))
        rep.add("exp_homomorphism_commuting", "exponential map g -> G",
                worst, tol.exp_homomorphism, "<=")

    def ad_equivariance():
        worst = 0.0
        for _ in range(samples):
            g = sample(ctx, rng, "group")
            x, y = sample(ctx, rng), sample(ctx, rng)
            r = pair(ctx, adjoint_action(g, x), adjoint_action(g, y)) - pair(ctx, x, y)
            worst = max(worst, abs(r) / max(1.0, np.linalg.norm(x) * np.linalg.norm(y)))
        rep.add("form_Ad_invariance", "Ad-invariance of the form", worst, tol.structure, "<=")

    for name, fn in [("jacobi_identity", jacobi), ("form_ad_invariance", invariance),
                     ("killing_trace_proportionality", killing),
                     ("centralizer_dim", centralizers), ("exp_homomorphism", exp_hom),
                     ("form_Ad_invariance", ad_equivariance)]:
        _guard(rep, name, "lie_core", fn)
    return rep


def suite_slodowy(ctx: LieContext, seed: int, samples: int) -> VerificationReport:
    rep = VerificationReport("slodowy")
    rng = np.random.default_rng([seed, 2])
    tol = ctx.tol
    slc = make_slice(ctx)

    def triple():
        rel = max(principal_triple(ctx).relation_residuals())
        rep.add("sl2_relations", "regular sl2-triple", rel, tol.triple, "<=")
        reg = [classify(ctx, m).is_regular for m in (slc.triple.xi, slc.triple.eta)]
        rep.add("triple_regular_nilpotent", "xi and eta regular nilpotent",
                int(not all(reg)), 0, "==")

    def slice_regular():
        bad = 0
        for _ in range(samples):
            u = rng.standard_normal(ctx.rank) + 1j * rng.standard_normal(ctx.rank)
            c = u / np.linalg.norm(u) * rng.uniform(0, 10)
            if classify(ctx, slc.point(c)).is_regular is not True:
                bad += 1
        rep.add("slice_inside_regular_locus", "S_reg is contained in g_reg", bad, 0, "==")

    def kostant():
        fs = invariants(ctx)
        worst = 0.0
        trans_bad = 0
        for k in range(samples):
            target = invariant_values(fs, sample(ctx, rng, "regular_semisimple"))
            sols = [kostant_section(slc, target, seed=k)]
            for _ in range(4):
                start = rng.standard_normal(ctx.rank) + 1j * rng.standard_normal(ctx.rank)
                sols.append(kostant_section(slc, target, start=start, seed=k))
            spread = max(np.linalg.norm(s - sols[0]) for s in sols)
            worst = max(worst, spread / (1 + np.linalg.norm(sols[0])))
            if transversality_rank(slc, slc.point(sols[0])) != ctx.dim:
                trans_bad += 1
        rep.add("kostant_single_point", "each regular orbit meets the slice once",
                worst, tol.kostant_agree, "<=")
        rep.add("slice_transversality", "slice transverse to regular orbits",
                trans_bad, 0, "==")

    def directional():
        worst = 0.0
        fs = invariants(ctx)
        for _ in range(max(1, samples // 10)):
            x, beta = sample(ctx, rng), sample(ctx, rng)
            for f in fs:
                poly = np.polynomial.polynomial.Polynomial.fit(
                    np.linspace(-1, 1, 4 * f.degree),
                    [f.value(x + t * beta) for t in np.linspace(-1, 1, 4 * f.degree)],
                    f.degree,
                ).convert()
                for j in range(f.degree + 1):
                    ref = poly.deriv(j)(0.0) if j else poly(0.0)
                    got = directional_derivative(f, beta, j, x)[0]
                    worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
        rep.add("directional_derivative_exact", "directional derivative d_beta^j f_i",
                worst, tol.fd_rel, "<=")

    def locus():
        pts = [sample(ctx, rng, "regular_semisimple") for _ in range(max(1, samples // 10))]
        pts.append(np.zeros((ctx.n, ctx.n), dtype=complex))
        d = np.ones(ctx.n)
        d[-1] = -(ctx.n - 1)
        pts.append(np.diag(d).astype(complex))
        res = regularity_locus_probe(ctx, pts)
        rep.add("regular_locus_equals_independence_locus",
                "g_reg = {rank dF = rk G}", int(not res["all_consistent"]), 0, "==")

    for name, fn in [("triple", triple), ("slice_regular", slice_regular),
                     ("kostant", kostant), ("directional", directional), ("locus", locus)]:
        _guard(rep, name, "slodowy", fn)
    return rep


def suite_symplectic(ctx: LieContext, seed: int, samples: int) -> VerificationReport:
    rep = VerificationReport("symplectic")
    rng = np.random.default_rng([seed, 3])
    tol = ctx.tol
    slc = make_slice(ctx)

    def submersion():
        bad = 0
        bad_img = 0
        for _ in range(samples):
            p = random_phase_point(slc, rng)
            if submersion_rank(p) != ctx.dim:
                bad += 1
            if classify(ctx, phi(p)).is_regular is not True:
                bad_img += 1
        rep.add("phi_submersion", "Phi is a submersion", bad, 0, "==")
        rep.add("phi_image_regular", "image of Phi is g_reg", bad_img, 0, "==")

    def poisson():
        worst = 0.0
        for k in range(samples):
            p = random_phase_point(slc, rng)
            lin = [LinearFunction(ctx, random_algebra_element(ctx, rng)) for _ in range(4)]
            f = lin[0] if k % 2 else ProductFunction(lin[0], lin[1])
            h = lin[2] if k % 3 else ProductFunction(lin[2], lin[3])
            worst = max(worst, verify_poisson_morphism(p, f, h))
        rep.add("poisson_morphism_two_engines", "Phi is a Poisson morphism",
                worst, tol.bracket, "<=")

    def moment():
        worst = 0.0
        for _ in range(samples):
            p = random_phase_point(slc, rng)
            worst = max(worst, verify_moment_map(p, random_algebra_element(ctx, rng)))
        rep.add("moment_map_identity", "mu is a moment map", worst, tol.moment, "<=")

    def isotropy():
        worst = 0.0
        for _ in range(samples):
            x = sample(ctx, rng, "regular_semisimple")
            tx = -adjoint_action(sample(ctx, rng, "group"), x)
            worst = max(worst, isotropy_residual(ctx, tx, centralizer(ctx, tx)))
        rep.add("fibres_isotropic", "fibres of Phi are isotropic", worst, tol.isotropy, "<=")

    def form():
        anti = 0.0
        smin = np.inf
        clos = 0.0
        for _ in range(samples):
            p = random_phase_point(slc, rng)
            om = omega_matrix(p)
            anti = max(anti, np.linalg.norm(om + om.T))
            smin = min(smin, np.linalg.svd(om, compute_uv=False)[-1])
            u, v, w = (random_tangent(slc, rng) for _ in range(3))
            clos = max(clos, closedness_residual(p, u, v, w))
        rep.add("omega_antisymmetric", "restricted form", anti, tol.antisym, "<=")
        rep.add("omega_nondegenerate_min_sv", "restricted form is symplectic",
                smin, tol.nondegeneracy, ">=")
        rep.add("omega_closed", "restricted form is closed", clos, tol.closedness, "<=")

    def fibres():
        worst = 0.0
        for k in range(max(1, samples // 10)):
            x = sample(ctx, rng, "regular_semisimple")
            worst = max(worst, fiber_membership_residual(slc, x, seed=k))
        rep.add("fibre_is_translated_stabilizer", "fibre = R_g(Z_G(tilde x)) x {tilde x}",
                worst, tol.conjugator, "<=")

    def certificate():
        cert = ais_certificate(slc, samples=samples, seed=seed)
        rep.add("ais_dimension_identity", "dim X = dim G + rk G",
                int(not cert.dimension_identity), 0, "==")
        rep.add("ais_image_regular", "mu(X) inside g_reg",
                cert.regular_failures + cert.uncertain, 0, "==")

    for name, fn in [("submersion", submersion), ("poisson", poisson), ("moment", moment),
                     ("isotropy", isotropy), ("form", form), ("fibres", fibres),
                     ("certificate", certificate)]:
        _guard(rep, name, "symplectic", fn)
    return rep


def suite_systems(ctx: LieContext, seed: int, samples: int,
                  include_constants: bool = False) -> VerificationReport:
    rep = VerificationReport("systems")
    rng = np.random.default_rng([seed, 4])
    tol = ctx.tol
    slc = make_slice(ctx)
    systems = {}

    def build():
        systems["invariant_pullback"] = build_invariant_pullback(
            slc, sample(ctx, rng, "regular_semisimple"))
        systems["mishchenko_fomenko"] = build_mf(slc, random_shift(ctx, rng), include_constants)
        ip, mf = systems["invariant_pullback"], systems["mishchenko_fomenko"]
        rep.add("invariant_pullback_count", "dim G functions", ip.count, ctx.dim, "==")
        rep.add("invariant_pullback_rank", "rank rk G", ip.declared_rank, ctx.rank, "==")
        expected = (ctx.dim + ctx.rank) // 2 + (ctx.rank if include_constants else 0)
        rep.add("mf_count", "(dim G + rk G)/2 functions", mf.count, expected, "==")

    def sweep():
        pts = [random_phase_point(slc, rng) for _ in range(samples)]
        for kind, s in systems.items():
            com = verify_commutativity(s, pts)
            rep.add(f"{kind}_commute_upstairs", "functions Poisson-commute",
                    com.max_up, tol.bracket, "<=")
            rep.add(f"{kind}_commute_downstairs", "functions Poisson-commute on g",
                    com.max_down, tol.bracket, "<=")
            ind = verify_independence(s, pts)
            expect_full = not (kind == "mishchenko_fomenko" and include_constants)
            if expect_full:
                rep.add(f"{kind}_independent", "differentials independent on a dense open set",
                        ind.full_rank_fraction, tol.independence_fraction, ">=")
            r, _ = differential_rank(s, degenerate_point(s, seed=seed))
            full = s.count - (ctx.rank if not expect_full else 0)
            rep.add(f"{kind}_degenerate_rank_drop", "the dense open set is proper",
                    int(r < full), 1, "==")

    _guard(rep, "build", "systems", build)
    if len(systems) == 2:
        _guard(rep, "sweep", "systems", sweep)
    return rep


SUITES = {
    "lie_core": suite_lie_core,
    "slodowy": suite_slodowy,
    "symplectic": suite_symplectic,
    "systems": suite_systems,
}


def verify_all(ctx: LieContext, seed: int = 1, samples: int = 100,
               include_constants: bool = False) -> VerificationReport:
    report = VerificationReport("verify-all", environment=environment(ctx, seed, samples))
    for name, fn in SUITES.items():
        if name == "systems":
            report.extend(fn(ctx, seed, samples, include_constants))
        else:
            report.extend(fn(ctx, seed, samples))
    return report
