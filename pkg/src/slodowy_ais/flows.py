"""Hamiltonian flows on ``G x S_reg`` and conservation of system functions.

The integrator is the fourth-order Runge-Kutta-Munthe-Kaas scheme on the
product of ``SL_n`` (acting by left multiplication ``g' = y(g, c) g``) with
the affine slice coordinates.  Group updates go through ``group_exp``, so
states stay on ``SL_n`` up to the determinant renormalization, and the slice
coordinates are updated linearly, so ``x`` stays on the slice exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .lie_core import group_exp, normalize_det
from .serialize import coords_to_json, matrix_to_json, to_jsonable
from .symplectic import NearSingularOmega, Observable, PhasePoint, field_vector
from .systems import IntegrableSystem


class StepRejected(RuntimeError):
    pass


@dataclass(eq=False)
class Trajectory:
    initial: PhasePoint
    hamiltonian_index: int
    h: float
    T: float
    times: list[float] = field(default_factory=list)
    states: list[PhasePoint] = field(default_factory=list)
    drift: list[float] = field(default_factory=list)
    rejected_steps: int = 0

    @property
    def final(self) -> PhasePoint:
        return self.states[-1]

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for t, p in zip(self.times, self.states):
                fh.write(json.dumps({"t": t, "g": matrix_to_json(p.g),
                                     "x_coords": coords_to_json(p.coords)}) + "\n")

    def summary(self, system: IntegrableSystem | None = None) -> dict:
        out = {
            "hamiltonian_index": self.hamiltonian_index,
            "h": self.h,
            "T": self.T,
            "states": len(self.states),
            "rejected_steps": self.rejected_steps,
            "drift": list(self.drift),
            "max_det_error": max(abs(np.linalg.det(p.g) - 1) for p in self.states),
        }
        if system is not None:
            out["labels"] = [o.label for o in system.observables]
        return to_jsonable(out)

    def to_csv(self, path, observables: list[Observable]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["t"]
            for o in observables:
                head += [f"{o.label}.re", f"{o.label}.im"]
            w.writerow(head)
            for t, p in zip(self.times, self.states):
                row = [t]
                for o in observables:
                    v = o.eval(p)
                    row += [v.real, v.imag]
                w.writerow(row)


def _lie(structure, a, b):
    # algebra bracket in basis coordinates; slice components commute
    return np.einsum("kij,i,j->k", structure, a, b)


class _Stepper:
    def __init__(self, obs: Observable, slc):
        self.obs = obs
        self.slc = slc
        self.ctx = slc.ctx
        self.dim = self.ctx.dim

    def rhs(self, g, c):
        p = PhasePoint(self.slc, g, c)
        return field_vector(p, self.obs.diff(p))

    def advance(self, g, c, u):
        y = self.ctx.from_coords(u[: self.dim])
        return group_exp(y) @ g, c + u[self.dim :]

    def bracket(self, a, b):
        out = np.zeros_like(a)
        out[: self.dim] = _lie(self.ctx.structure, a[: self.dim], b[: self.dim])
        return out

    def step(self, g, c, h):
        k1 = h * self.rhs(g, c)
        k2 = h * self.rhs(*self.advance(g, c, k1 / 2))
        k3 = h * self.rhs(*self.advance(g, c, k2 / 2 - self.bracket(k1, k2) / 8))
        k4 = h * self.rhs(*self.advance(g, c, k3))
        v = (k1 + 2 * k2 + 2 * k3 + k4) / 6 - self.bracket(k1, k4) / 12
        g1, c1 = self.advance(g, c, v)
        return normalize_det(g1), c1


def integrate(
    system: IntegrableSystem,
    obs_index: int,
    p0: PhasePoint,
    h: float,
    T: float,
    error_control: bool = True,
    hamiltonian: Observable | None = None,
    every: int | None = None,
) -> Trajectory:
    """Flow of ``system.observables[obs_index]`` (or ``hamiltonian``) for real time ``T``.

    With ``error_control`` each step is compared against two half steps; a
    step whose estimate exceeds ``tol.local_error`` is redone as two half steps
    (recursively, at most 8 levels deep).  States are recorded every
    ``every`` steps (default: about 100 states per trajectory).
    """
    if h <= 0 or T < h:
        raise ValueError("need h > 0 and T >= h")
    obs = system.observables[obs_index] if hamiltonian is None else hamiltonian
    stepper = _Stepper(obs, system.slc)
    tol = system.ctx.tol.local_error
    nsteps = int(round(T / h))
    every = max(1, int(T / (100 * h))) if every is None else every
    traj = Trajectory(p0, obs_index, h, T, [0.0], [p0])

    def controlled(g, c, dt, depth=0):
        g1, c1 = stepper.step(g, c, dt)
        if not error_control:
            return g1, c1
        gh, ch = stepper.step(g, c, dt / 2)
        g2, c2 = stepper.step(gh, ch, dt / 2)
        err = np.linalg.norm(g1 - g2) + np.linalg.norm(c1 - c2)
        if err <= tol:
            return g1, c1
        if depth >= 8:
            raise StepRejected(f"local error {err:.3g} above {tol:g} at minimum step")
        traj.rejected_steps += 1
        return controlled(*controlled(g, c, dt / 2, depth + 1), dt / 2, depth + 1)

    g, c = p0.g, p0.coords
    for k in range(1, nsteps + 1):
        try:
            g, c = controlled(g, c, h)
        except NearSingularOmega as exc:
            raise NearSingularOmega(f"at step {k}: {exc}") from exc
        if k % every == 0 or k == nsteps:
            traj.times.append(k * h)
            traj.states.append(PhasePoint(system.slc, g, c))
    traj.drift = conservation_report(traj, system)
    return traj


def observable_drift(traj: Trajectory, obs: Observable) -> float:
    f0 = obs.eval(traj.states[0])
    return max(abs(obs.eval(p) - f0) for p in traj.states) / (1 + abs(f0))


def conservation_report(traj: Trajectory, system: IntegrableSystem) -> list[float]:
    """Per-observable ``max_t |F(p_t) - F(p_0)| / (1 + |F(p_0)|)``."""
    return [observable_drift(traj, o) for o in system.observables]


def state_distance(p: PhasePoint, q: PhasePoint) -> float:
    return float(np.linalg.norm(p.g - q.g) + np.linalg.norm(p.coords - q.coords))


def nonlinear_member(system: IntegrableSystem) -> int:
    """Index of a shifted invariant of degree >= 2 whose flow is not integrated exactly.

    Flows of the invariants and of linear members are reproduced by the
    scheme up to roundoff, so they cannot exhibit the order of accuracy.
    """
    for i, f in enumerate(system.functions):
        if getattr(f, "j", 0) >= 1 and f.degree >= 2:
            return i
    raise ValueError("system has no nonlinear non-invariant member (needs n >= 3)")


def convergence_factor(system: IntegrableSystem, obs_index: int, p0: PhasePoint,
                       h: float, T: float) -> float:
    """Ratio of global errors at steps ``h`` and ``h / 2`` against an ``h / 16`` reference.

    The global error is the largest state distance over the grid ``k h``, so
    an accidental cancellation at the final time cannot inflate the ratio.
    """
    def run(step, stride):
        traj = integrate(system, obs_index, p0, step, T, error_control=False, every=stride)
        return traj.states

    ref = run(h / 16, 16)
    coarse = run(h, 1)
    fine = run(h / 2, 2)
    e1 = max(state_distance(a, b) for a, b in zip(coarse, ref))
    e2 = max(state_distance(a, b) for a, b in zip(fine, ref))
    return e1 / e2
