"""Integrable systems on G x S_reg for G = SL_n(C), with numerical verification."""

__version__ = "0.1.0"

from .lie_core import (  # noqa: E402
    LieContext,
    Tolerances,
    adjoint_action,
    bracket,
    centralizer,
    classify,
    group_exp,
    make_context,
    pair,
    sample,
)
from .slodowy import kostant_section, make_slice, principal_triple, slice_representative  # noqa: E402
from .symplectic import PhasePoint, phi, fiber_report, random_phase_point  # noqa: E402
from .systems import build_invariant_pullback, build_mf  # noqa: E402

__all__ = [
    "LieContext",
    "Tolerances",
    "PhasePoint",
    "adjoint_action",
    "bracket",
    "build_invariant_pullback",
    "build_mf",
    "centralizer",
    "classify",
    "fiber_report",
    "group_exp",
    "kostant_section",
    "make_context",
    "make_slice",
    "pair",
    "phi",
    "principal_triple",
    "random_phase_point",
    "sample",
    "slice_representative",
]
