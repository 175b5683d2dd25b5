"""Command-line entry point: ``slodowy-ais <subcommand> [flags]``.

Exit codes: 0 pass, 1 fail (or suite error), 2 usage, parse or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .flows import integrate
from .lie_core import LieError, Tolerances, classify, make_context
from .report import environment, verify_all
from .serialize import ParseError, coords_from_json, dumps, matrix_from_json, matrix_to_json
from .slodowy import make_slice
from .symplectic import fiber_report, phase_point, random_phase_point
from .systems import (
    SystemRejected,
    build_invariant_pullback,
    build_mf,
    random_shift,
    verify_commutativity,
    verify_independence,
)
from .lie_core import sample

N_CAP = 8
FORMS = {"trace": "trace_form", "killing": "killing_form"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    n: int = 2
    seed: int = 1
    samples: int = 100
    tolerances: dict = field(default_factory=dict)
    form_kind: str = "trace"
    mf_include_constants: bool = False
    out: str | None = None

    def __post_init__(self):
        if not 2 <= self.n <= N_CAP:
            raise UsageError(f"n must satisfy 2 <= n <= {N_CAP}, got {self.n}")
        if self.seed < 0:
            raise UsageError("seed must be a non-negative integer")
        if self.samples < 1:
            raise UsageError("samples must be positive")
        if self.form_kind not in FORMS:
            raise UsageError(f"form must be one of {sorted(FORMS)}")
        known = {f.name for f in dataclasses.fields(Tolerances)}
        bad = sorted(set(self.tolerances) - known)
        if bad:
            raise UsageError(f"unknown tolerance(s): {', '.join(bad)}")

    def context(self):
        return make_context(self.n, FORMS[self.form_kind], **self.tolerances)


def read_config_file(path) -> dict:
    """``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.lstrip("-")] = v
    return out


def _float(name, text):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{name}: not a number: {text!r}") from None


def _int(name, text):
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{name}: not an integer: {text!r}") from None


def _bool(name, text):
    t = str(text).lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{name}: not a boolean: {text!r}")


def build_config(args, extra: list[str]) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    tols = {}
    for k, v in list(values.items()):
        if k.startswith("tol."):
            tols[k[4:]] = _float(k, v)
            del values[k]
    for tok in extra:
        if not tok.startswith("--tol."):
            raise UsageError(f"unrecognized argument: {tok}")
        if "=" not in tok:
            raise UsageError(f"{tok}: expected --tol.<name>=<value>")
        k, v = tok[6:].split("=", 1)
        tols[k] = _float(tok, v)
    # command-line flags override the config file
    for key in ("n", "seed", "samples", "form", "out", "mf-include-constants"):
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is not None:
            values[key] = getattr(args, attr)
    unknown = set(values) - {"n", "seed", "samples", "form", "out", "mf-include-constants"}
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return RunConfig(
        n=_int("n", values.get("n", 2)),
        seed=_int("seed", values.get("seed", 1)),
        samples=_int("samples", values.get("samples", 100)),
        tolerances=tols,
        form_kind=str(values.get("form", "trace")),
        mf_include_constants=_bool("mf-include-constants", values.get("mf-include-constants", False)),
        out=values.get("out"),
    )


def _load_matrix(text: str) -> np.ndarray:
    if text.startswith("@"):
        try:
            text = open(text[1:]).read()
        except OSError as exc:
            raise ParseError(f"cannot read {text[1:]}: {exc}") from exc
    return matrix_from_json(text)


def _check_matrix(cfg: RunConfig, x: np.ndarray, what: str) -> None:
    if x.shape != (cfg.n, cfg.n):
        raise ParseError(f"{what} is {x.shape[0]}x{x.shape[0]} but n = {cfg.n}")
    if abs(np.trace(x)) > 1e-10 * max(1.0, np.linalg.norm(x)):
        raise ParseError(f"{what} is not traceless")


def cmd_verify_all(cfg: RunConfig, args) -> tuple[dict, int]:
    rep = verify_all(cfg.context(), cfg.seed, cfg.samples, cfg.mf_include_constants)
    return rep.to_dict(), 0 if rep.verdict == "pass" else 1


def cmd_fiber(cfg: RunConfig, args) -> tuple[dict, int]:
    ctx = cfg.context()
    slc = make_slice(ctx)
    if args.x == "minus-xi":
        x = -slc.triple.xi
    elif args.x == "random":
        x = sample(ctx, cfg.seed, "regular_semisimple")
    else:
        x = _load_matrix(args.x)
        _check_matrix(cfg, x, "x")
    if classify(ctx, x).is_regular is not True:
        raise UsageError("x is not regular")
    rep = fiber_report(slc, x)
    out = rep.to_dict()
    out["environment"] = environment(ctx, cfg.seed, cfg.samples)
    return out, 0


def _sweep(cfg: RunConfig, system) -> tuple[dict, int]:
    ctx = system.ctx
    rng = np.random.default_rng([cfg.seed, 5])
    pts = [random_phase_point(system.slc, rng) for _ in range(cfg.samples)]
    com = verify_commutativity(system, pts)
    ind = verify_independence(system, pts)
    ok = com.max_residual <= ctx.tol.bracket
    if not system.include_constants:
        ok = ok and ind.full_rank_fraction >= ctx.tol.independence_fraction
    out = {
        "manifest": system.manifest(),
        "commutativity": com.to_dict(),
        "independence": ind.to_dict(),
        "verdict": "pass" if ok else "fail",
        "environment": environment(ctx, cfg.seed, cfg.samples),
    }
    return out, 0 if ok else 1


def cmd_mf(cfg: RunConfig, args) -> tuple[dict, int]:
    ctx = cfg.context()
    if args.random or args.beta is None:
        beta = random_shift(ctx, cfg.seed)
    else:
        beta = _load_matrix(args.beta)
        _check_matrix(cfg, beta, "beta")
    try:
        system = build_mf(make_slice(ctx), beta, cfg.mf_include_constants)
    except SystemRejected as exc:
        raise UsageError(f"invalid beta: {exc}") from exc
    return _sweep(cfg, system)


def cmd_rank_system(cfg: RunConfig, args) -> tuple[dict, int]:
    ctx = cfg.context()
    probe = sample(ctx, cfg.seed, "regular_semisimple")
    return _sweep(cfg, build_invariant_pullback(make_slice(ctx), probe))


def _system_from_manifest(cfg: RunConfig, man: dict):
    try:
        n, form = int(man["n"]), man.get("form", "trace_form")
        kind = man["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed manifest: {exc}") from exc
    if n != cfg.n:
        cfg = dataclasses.replace(cfg, n=n)
    ctx = make_context(n, form, **cfg.tolerances)
    slc = make_slice(ctx)
    if kind == "mishchenko_fomenko":
        return build_mf(slc, matrix_from_json(man["beta"]), bool(man.get("include_constants")))
    if kind == "invariant_pullback":
        system = build_invariant_pullback(slc, sample(ctx, cfg.seed, "regular_semisimple"))
        if "minor_columns" in man and list(man["minor_columns"]) != system.minor_columns:
            # rebuild with the recorded coordinate choice
            from .functions import coordinate_function, invariants
            from .systems import IntegrableSystem
            keep = [int(j) for j in man["coordinate_selection"]]
            fns = list(invariants(ctx)) + [coordinate_function(ctx, j) for j in keep]
            system = IntegrableSystem(slc, fns, ctx.rank, kind, coordinate_selection=keep,
                                      minor_columns=[int(j) for j in man["minor_columns"]])
        return system
    raise ParseError(f"unknown system kind {kind!r}")


def cmd_flow(cfg: RunConfig, args) -> tuple[dict, int]:
    if args.manifest:
        try:
            man = json.load(open(args.manifest))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read manifest: {exc}") from exc
        man = man.get("manifest", man)
        system = _system_from_manifest(cfg, man)
    else:
        ctx = cfg.context()
        system = build_mf(make_slice(ctx), random_shift(ctx, cfg.seed), cfg.mf_include_constants)
    if not 0 <= args.hamiltonian < system.count:
        raise UsageError(f"hamiltonian index must be in [0, {system.count})")
    if args.start:
        try:
            st = json.load(open(args.start))
            p0 = phase_point(system.slc, matrix_from_json(st["g"]), coords_from_json(st["x_coords"]))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read start state: {exc}") from exc
    else:
        p0 = random_phase_point(system.slc, np.random.default_rng([cfg.seed, 6]))
    traj = integrate(system, args.hamiltonian, p0, args.h, args.T)
    if args.trajectory:
        traj.to_jsonl(args.trajectory)
    if args.csv:
        traj.to_csv(args.csv, system.observables)
    limit = system.ctx.tol.drift
    ok = max(traj.drift) <= limit
    out = {
        "manifest": system.manifest(),
        "summary": traj.summary(system),
        "drift_limit": limit,
        "verdict": "pass" if ok else "fail",
        "environment": environment(system.ctx, cfg.seed, cfg.samples),
    }
    return out, 0 if ok else 1


def cmd_info(cfg: RunConfig, args) -> tuple[dict, int]:
    ctx = cfg.context()
    slc = make_slice(ctx)
    return {
        "version": __version__,
        "n": ctx.n,
        "form": ctx.form_kind,
        "dim": ctx.dim,
        "rank": ctx.rank,
        "degrees": list(ctx.degrees),
        "phase_space_dim": ctx.dim + ctx.rank,
        "mf_count": (ctx.dim + ctx.rank) // 2,
        "xi": matrix_to_json(slc.triple.xi),
        "eta": matrix_to_json(slc.triple.eta),
        "tolerances": dict(ctx.tol.__dict__),
    }, 0


COMMANDS = {
    "verify-all": cmd_verify_all,
    "fiber": cmd_fiber,
    "mf": cmd_mf,
    "rank-system": cmd_rank_system,
    "flow": cmd_flow,
    "info": cmd_info,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--samples", type=int, default=argparse.SUPPRESS)
    common.add_argument("--form", choices=sorted(FORMS), default=argparse.SUPPRESS)
    common.add_argument("--mf-include-constants", action="store_const", const=True,
                        default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the JSON report here")
    common.add_argument("--config", default=argparse.SUPPRESS, help="key=value config file")

    parser = argparse.ArgumentParser(
        prog="slodowy-ais", parents=[common],
        epilog="Tolerances: --tol.<name>=<value>, e.g. --tol.bracket=1e-10.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-all", parents=[common], help="run every verification suite")
    p = sub.add_parser("fiber", parents=[common], help="describe the fibre of Phi over x")
    p.add_argument("x", help="matrix JSON, @file, 'minus-xi' or 'random'")
    p = sub.add_parser("mf", parents=[common], help="argument-shift system sweep")
    p.add_argument("--beta", help="matrix JSON or @file")
    p.add_argument("--random", action="store_true", help="seeded random beta (default)")
    sub.add_parser("rank-system", parents=[common], help="invariant pullback system sweep")
    p = sub.add_parser("flow", parents=[common], help="integrate one Hamiltonian flow")
    p.add_argument("--manifest", help="system manifest JSON (output of mf / rank-system)")
    p.add_argument("--hamiltonian", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--start", help="JSON state {g, x_coords}")
    p.add_argument("--trajectory", help="write states as JSON lines")
    p.add_argument("--csv", help="write observable values as CSV")
    sub.add_parser("info", parents=[common], help="dimensions and the principal triple")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for attr in ("n", "seed", "samples", "form", "mf_include_constants", "out", "config"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        cfg = build_config(args, extra)
        payload, code = COMMANDS[args.command](cfg, args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LieError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = dumps(payload) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
        print(f"{args.command}: {payload.get('verdict', 'ok')} -> {cfg.out}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
