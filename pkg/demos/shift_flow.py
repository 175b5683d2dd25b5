"""Integrate a Mishchenko-Fomenko flow on G x S and watch the integrals.

Run with ``python3 demos/shift_flow.py``.
"""

import numpy as np

from slodowy_ais import make_context, make_slice
from slodowy_ais.flows import (
    conservation_report,
    convergence_factor,
    integrate,
    nonlinear_member,
    observable_drift,
)
from slodowy_ais.functions import coordinate_function
from slodowy_ais.symplectic import phi, pullback, random_phase_point
from slodowy_ais.systems import build_mf, random_shift, verify_commutativity, verify_independence

ctx = make_context(3)
slc = make_slice(ctx)
mf = build_mf(slc, random_shift(ctx, 0))
print(f"{mf.count} functions:", [f.label for f in mf.functions])

pts = [random_phase_point(slc, s) for s in range(20)]
print(f"max bracket residual: {verify_commutativity(mf, pts).max_residual:.1e}")
print(f"independent at {verify_independence(mf, pts).full_rank_fraction:.0%} of sample points")

k = nonlinear_member(mf)
p0 = random_phase_point(slc, 1)
traj = integrate(mf, k, p0, 2e-3, 0.5, every=25)
print(f"flow of member {k}: {len(traj.states)} states, {traj.rejected_steps} rejected steps")
print("drift of each member:", np.array2string(np.array(conservation_report(traj, mf)), precision=1))

# a matrix entry of Phi is not conserved
theta = pullback(coordinate_function(ctx, 0))
print(f"drift of a coordinate of Phi: {observable_drift(traj, theta):.2e}")
print("Phi moved by", round(float(np.linalg.norm(phi(traj.final) - phi(p0))), 3))

factor = convergence_factor(mf, k, p0, 0.025, 0.5)
print(f"error ratio under step halving: {factor:.1f} (fourth order gives 16)")
