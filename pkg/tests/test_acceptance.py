"""Acceptance gate: the twelve criteria at their stated tolerances.

Each test records a one-line PASS/FAIL summary that is printed at the end of
the pytest run (section "acceptance criteria").
"""

import numpy as np

from conftest import ACCEPTANCE
from slodowy_ais.flows import convergence_factor, integrate, nonlinear_member, observable_drift
from slodowy_ais.functions import LinearFunction, ProductFunction, coordinate_function, invariants
from slodowy_ais.lie_core import (
    ad_matrix,
    adjoint_action,
    bracket,
    centralizer,
    classify,
    make_context,
    pair,
    random_algebra_element,
    sample,
    trace_pair,
)
from slodowy_ais.slodowy import (
    invariant_values,
    kostant_section,
    kostant_section_triangular,
    make_slice,
    transversality_rank,
)
from slodowy_ais.symplectic import (
    ais_certificate,
    fiber_report,
    isotropy_residual,
    omega_matrix,
    phi,
    pullback,
    random_phase_point,
    submersion_rank,
    verify_moment_map,
    verify_poisson_morphism,
)
from slodowy_ais.systems import (
    build_invariant_pullback,
    build_mf,
    random_shift,
    regularity_locus_probe,
    verify_commutativity,
    verify_independence,
)


def criterion(k, ok, text):
    ACCEPTANCE[k] = ("PASS" if ok else "FAIL", text)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {text}")
    assert ok, text


def phase_points(slc, count, seed):
    rng = np.random.default_rng(seed)
    return [random_phase_point(slc, rng) for _ in range(count)]


def test_01_structure():
    worst = {"jacobi": 0.0, "invariance": 0.0, "killing": 0.0}
    for n in (2, 3, 4):
        rng = np.random.default_rng([1, n])
        ctx = make_context(n)
        kctx = make_context(n, "killing")
        for _ in range(100):
            x, y, z = (sample(ctx, rng) for _ in range(3))
            scale = max(1.0, np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z))
            jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
            worst["jacobi"] = max(worst["jacobi"], np.linalg.norm(jac) / scale)
            for c in (ctx, kctx):
                r = pair(c, bracket(z, x), y) + pair(c, x, bracket(z, y))
                worst["invariance"] = max(worst["invariance"], abs(r) / (c.form_scale * scale))
            brute = np.trace(ad_matrix(kctx, x) @ ad_matrix(kctx, y))
            k = abs(brute - 2 * n * trace_pair(x, y)) / max(1.0, abs(brute))
            worst["killing"] = max(worst["killing"], k)
    ok = max(worst.values()) <= 1e-9
    criterion(1, ok, "structure residuals (n=2..4, 100 samples): "
              + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()) + " <= 1e-9")


def test_02_kostant():
    bad_regular = bad_trans = 0
    agree = oracle = 0.0
    tested = 0
    for n in (2, 3, 4):
        ctx = make_context(n)
        slc = make_slice(ctx)
        fs = invariants(ctx)
        rng = np.random.default_rng([2, n])
        for _ in range(500):
            u = rng.standard_normal(ctx.rank) + 1j * rng.standard_normal(ctx.rank)
            c = u / np.linalg.norm(u) * rng.uniform(0, 10)
            if classify(ctx, slc.point(c)).is_regular is not True:
                bad_regular += 1
        for k in range(100):
            target = invariant_values(fs, sample(ctx, rng, "regular_semisimple"))
            sols = [kostant_section(slc, target, seed=k)]
            for _ in range(4):
                start = 2 * (rng.standard_normal(ctx.rank) + 1j * rng.standard_normal(ctx.rank))
                sols.append(kostant_section(slc, target, start=start, seed=k))
            ref = sols[0]
            size = 1 + np.linalg.norm(ref)
            agree = max(agree, max(np.linalg.norm(s - ref) for s in sols) / size)
            oracle = max(oracle, np.linalg.norm(kostant_section_triangular(slc, target) - ref) / size)
            for s in sols:
                tested += 1
                if transversality_rank(slc, slc.point(s)) != ctx.dim:
                    bad_trans += 1
    ok = bad_regular == 0 and agree <= 1e-8 and oracle <= 1e-8 and bad_trans == 0
    criterion(2, ok, f"slice regular failures {bad_regular}/1500; multi-start spread {agree:.2e}; "
              f"triangular-oracle gap {oracle:.2e} (<= 1e-8); transversality failures {bad_trans}/{tested}")


def test_03_submersion_and_image():
    rank_fail = image_fail = 0
    for n in (2, 3, 4):
        ctx = make_context(n)
        slc = make_slice(ctx)
        for p in phase_points(slc, 200, [3, n]):
            if submersion_rank(p) != ctx.dim:
                rank_fail += 1
        for p in phase_points(slc, 1000, [31, n]):
            if classify(ctx, phi(p)).is_regular is not True:
                image_fail += 1
    ok = rank_fail == 0 and image_fail == 0
    criterion(3, ok, f"d_phi rank deficits {rank_fail}/600; non-regular images {image_fail}/3000 (n=2..4)")


def test_04_poisson_morphism():
    worst = 0.0
    for n in (2, 3):
        for form in ("trace", "killing"):
            ctx = make_context(n, form)
            slc = make_slice(ctx)
            rng = np.random.default_rng([4, n, len(form)])
            for k in range(100):
                p = random_phase_point(slc, rng)
                lin = [LinearFunction(ctx, random_algebra_element(ctx, rng)) for _ in range(4)]
                f = lin[0] if k % 2 else ProductFunction(lin[0], lin[1])
                h = lin[2] if k % 3 else ProductFunction(lin[2], lin[3])
                worst = max(worst, verify_poisson_morphism(p, f, h))
    criterion(4, worst <= 1e-8, f"two-engine bracket residual {worst:.2e} <= 1e-8 (n=2,3, both forms, 400 triples)")


def test_05_moment_map():
    worst = 0.0
    for n in (2, 3):
        ctx = make_context(n)
        slc = make_slice(ctx)
        rng = np.random.default_rng([5, n])
        for _ in range(100):
            p = random_phase_point(slc, rng)
            worst = max(worst, verify_moment_map(p, random_algebra_element(ctx, rng)))
    criterion(5, worst <= 1e-8, f"moment-map residual {worst:.2e} <= 1e-8 (n=2,3, 200 pairs)")


def test_06_isotropy_and_form():
    iso = anti = 0.0
    smin = np.inf
    flagged = 0
    for n in (2, 3, 4):
        ctx = make_context(n)
        slc = make_slice(ctx)
        rng = np.random.default_rng([6, n])
        for k in range(200):
            # regular slice points: generic, plus the nilpotent xi
            c = np.zeros(ctx.rank) if k == 0 else rng.standard_normal(ctx.rank) + 1j * rng.standard_normal(ctx.rank)
            tx = slc.point(c)
            iso = max(iso, isotropy_residual(ctx, tx, centralizer(ctx, tx)))
        for p in phase_points(slc, 200, [61, n]):
            om = omega_matrix(p)
            anti = max(anti, float(np.linalg.norm(om + om.T)))
            s = float(np.linalg.svd(om, compute_uv=False)[-1])
            smin = min(smin, s)
            flagged += s < 1e-8
    ok = iso <= 1e-9 and anti <= 1e-12 and flagged == 0
    criterion(6, ok, f"isotropy {iso:.2e} <= 1e-9 (relative); antisymmetry {anti:.2e} <= 1e-12; "
              f"min singular value {smin:.3f}, flagged below 1e-8: {flagged}")


def test_07_counts():
    rows = []
    ok = True
    for n in (2, 3, 4, 5):
        ctx = make_context(n)
        slc = make_slice(ctx)
        ip = build_invariant_pullback(slc, sample(ctx, [7, n], "regular_semisimple"))
        mf = build_mf(slc, random_shift(ctx, [7, n]))
        good = (ip.count == n * n - 1 and ip.declared_rank == n - 1
                and mf.count == (n * n + n - 2) // 2)
        ok &= good
        rows.append(f"n={n}:{ip.count}/{ip.declared_rank}/{mf.count}")
    criterion(7, ok, "pullback count/rank and MF count: " + " ".join(rows))


def test_08_commutativity():
    worst = {}
    for n in (2, 3, 4):
        ctx = make_context(n)
        slc = make_slice(ctx)
        pts = phase_points(slc, 100, [8, n])
        systems = {
            "pullback": build_invariant_pullback(slc, sample(ctx, [8, n], "regular_semisimple")),
            "mf": build_mf(slc, random_shift(ctx, [81, n])),
        }
        for name, s in systems.items():
            rep = verify_commutativity(s, pts)
            for engine, v in (("up", rep.max_up), ("down", rep.max_down)):
                worst[f"{name}.{engine}"] = max(worst.get(f"{name}.{engine}", 0.0), v)
    ok = max(worst.values()) <= 1e-8
    criterion(8, ok, "max bracket residuals (n=2..4, 100 points): "
              + ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + " <= 1e-8")


def test_09_independence():
    fractions = {}
    for n in (2, 3, 4):
        ctx = make_context(n)
        slc = make_slice(ctx)
        pts = phase_points(slc, 200, [9, n])
        ip = build_invariant_pullback(slc, sample(ctx, [9, n], "regular_semisimple"))
        mf = build_mf(slc, random_shift(ctx, [91, n]))
        for name, s in (("pullback", ip), ("mf", mf)):
            fractions[f"{name}.n{n}"] = verify_independence(s, pts).full_rank_fraction
    ctx3 = make_context(3)
    regular = [sample(ctx3, [92, k], "regular_semisimple") for k in range(20)]
    probe = regularity_locus_probe(ctx3, regular + [np.zeros((3, 3)), np.diag([1.0, 1.0, -2.0])])
    ranks = [r.gradient_rank for r in probe["rows"]]
    locus_ok = all(r == 2 for r in ranks[:20]) and ranks[20] < 2 and ranks[21] < 2
    ok = min(fractions.values()) >= 0.99 and locus_ok and probe["all_consistent"]
    criterion(9, ok, f"min full-rank fraction {min(fractions.values()):.3f} >= 0.99 over 200 points; "
              f"locus probe ranks: regular={sorted(set(ranks[:20]))}, x=0 -> {ranks[20]}, "
              f"diag(1,1,-2) -> {ranks[21]}")


def test_10_dynamics():
    max_drift = 0.0
    min_control = np.inf
    for n in (2, 3):
        ctx = make_context(n)
        slc = make_slice(ctx)
        mf = build_mf(slc, random_shift(ctx, [10, n]))
        p0 = random_phase_point(slc, [10, n])
        thetas = [pullback(coordinate_function(ctx, j)) for j in range(ctx.dim)]
        for k, f in enumerate(mf.functions):
            traj = integrate(mf, k, p0, 1e-3, 1.0)
            max_drift = max(max_drift, max(traj.drift))
            if f.j >= 1:
                # invariant flows fix phi, so only shifted members give a control
                control = max(observable_drift(traj, t) for t in thetas)
                min_control = min(min_control, control)
    ctx = make_context(3)
    slc = make_slice(ctx)
    factors = []
    for s in range(10):
        mf = build_mf(slc, random_shift(ctx, s))
        factors.append(convergence_factor(mf, nonlinear_member(mf), random_phase_point(slc, s + 3), 0.025, 0.5))
    median = float(np.median(factors))
    ok = max_drift <= 1e-6 and min_control >= 1e-2 and 12 <= median <= 20
    criterion(10, ok, f"MF drift {max_drift:.2e} <= 1e-6 (h=1e-3, T=1, n=2,3); "
              f"min negative-control drift {min_control:.2e} >= 1e-2; step-halving factor median "
              f"{median:.1f} in [12, 20] (per seed: {', '.join(f'{f:.1f}' for f in factors)})")


def test_11_fibers():
    bad = 0
    nil = []
    for n in (2, 3, 4):
        ctx = make_context(n)
        slc = make_slice(ctx)
        for k in range(100):
            rep = fiber_report(slc, sample(ctx, [11, n, k], "regular_semisimple"))
            if rep.kind != "torus" or rep.fiber_dim != n - 1:
                bad += 1
        rep = fiber_report(slc, -slc.xi)
        nil.append(rep.kind == "nilpotent_type" and rep.component_count_theoretical == n
                   and rep.fiber_dim == n - 1)
    ok = bad == 0 and all(nil)
    criterion(11, ok, f"torus fibres of dim n-1: {300 - bad}/300; x=-xi nilpotent_type with n components: {nil}")


def test_12_ais_certificate():
    certs = [ais_certificate(make_slice(make_context(n)), samples=1000, seed=12) for n in (2, 3)]
    ok = all(c.passed for c in certs)
    criterion(12, ok, "; ".join(
        f"n={c.n}: dim {c.dim_group}+{c.rank}={c.dim_phase_space}, "
        f"{c.regular_failures + c.uncertain}/1000 non-regular" for c in certs))


def test_form_is_ad_invariant():
    # group-level companion to criterion 1
    ctx = make_context(3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        g = sample(ctx, rng, "group")
        x, y = sample(ctx, rng), sample(ctx, rng)
        assert abs(pair(ctx, adjoint_action(g, x), adjoint_action(g, y)) - pair(ctx, x, y)) <= 1e-9 * max(
            1, np.linalg.norm(x) * np.linalg.norm(y))
