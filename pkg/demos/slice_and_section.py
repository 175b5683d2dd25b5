"""Walk through the principal slice in sl_3 and solve for a Kostant section point.

Run with ``python3 demos/slice_and_section.py``.
"""

import numpy as np

from slodowy_ais import classify, make_context, make_slice, sample
from slodowy_ais.functions import invariants
from slodowy_ais.slodowy import (
    invariant_values,
    kostant_section,
    kostant_section_triangular,
    transversality_rank,
)

np.set_printoptions(precision=3, suppress=True)

ctx = make_context(3)
slc = make_slice(ctx)
t = slc.triple
print("xi =\n", t.xi.real)
print("h  =\n", t.h.real)
print("eta =\n", t.eta.real)

# the triple satisfies the sl_2 relations exactly
print("[h, xi] - 2 xi:", np.abs(t.h @ t.xi - t.xi @ t.h - 2 * t.xi).max())

# pick a regular semisimple x and read off its invariants tr(x^2), tr(x^3)
x = sample(ctx, 5, "regular_semisimple")
target = invariant_values(invariants(ctx), x)
print("eigenvalues of x:", np.round(np.linalg.eigvals(x), 3))

# Newton from xi, and the forward-substitution solver as a cross-check
c = kostant_section(slc, target)
c_tri = kostant_section_triangular(slc, target)
print("slice coordinates:", np.round(c, 6))
print("solver disagreement:", np.linalg.norm(c - c_tri))

y = slc.point(c)
print("eigenvalues on the slice:", np.round(np.linalg.eigvals(y), 3))
print("regular:", classify(ctx, y).is_regular)
print("transversality rank:", transversality_rank(slc, y), "of", ctx.dim)
