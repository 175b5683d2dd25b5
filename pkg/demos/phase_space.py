"""The phase space G x S, its two-form, the map Phi and its fibres.

Run with ``python3 demos/phase_space.py``.
"""

import numpy as np

from slodowy_ais import make_context, make_slice, sample
from slodowy_ais.functions import LinearFunction
from slodowy_ais.lie_core import random_algebra_element
from slodowy_ais.symplectic import (
    ais_certificate,
    fiber_report,
    omega_matrix,
    phi,
    random_phase_point,
    submersion_rank,
    verify_moment_map,
    verify_poisson_morphism,
)

ctx = make_context(3)
slc = make_slice(ctx)
rng = np.random.default_rng(0)

p = random_phase_point(slc, rng)
om = omega_matrix(p)
s = np.linalg.svd(om, compute_uv=False)
print(f"omega is {om.shape[0]}x{om.shape[1]}, antisymmetry {np.linalg.norm(om + om.T):.1e}, "
      f"smallest singular value {s[-1]:.3f}")
print("rank of dPhi:", submersion_rank(p), "of", ctx.dim)

# Phi carries the symplectic bracket to the Lie-Poisson bracket
f = LinearFunction(ctx, random_algebra_element(ctx, rng))
h = LinearFunction(ctx, random_algebra_element(ctx, rng))
print(f"Poisson morphism residual: {verify_poisson_morphism(p, f, h):.1e}")
print(f"moment map residual: {verify_moment_map(p, random_algebra_element(ctx, rng)):.1e}")
print("Phi(p) is traceless:", abs(np.trace(phi(p))) < 1e-12)

# fibres over a regular semisimple point and over -xi
for label, x in (("regular semisimple", sample(ctx, 1, "regular_semisimple")), ("-xi", -slc.xi)):
    rep = fiber_report(slc, x)
    print(f"fibre over {label}: kind={rep.kind}, dim={rep.fiber_dim}, "
          f"components={rep.component_count_theoretical}, isotropy={rep.isotropy_residual:.1e}")

cert = ais_certificate(slc, samples=200, seed=1)
print(f"dim G + rank = {cert.dim_group} + {cert.rank} = {cert.dim_phase_space}; "
      f"non-regular images: {cert.regular_failures + cert.uncertain}/{cert.samples}")
