"""Command-line entry point.

Subcommands: run, validate, convergence, normalize-check.  Stable
machine-parsable key=value lines go to stdout; diagnostics go to stderr.
Exit codes: 0 success, 1 validation/solver failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .engine import advance, init_state, run
from .grid import Grid, ScalarField, integrate
from .oracles import (diffusion_spatial_study, diffusion_temporal_study,
                      ode_trapezoid_oracle)
from .params import SimConfig, default_params, load_config
from .proteins import SolverError
from .sources import MollifierPotential, bump_normalizer, deposit


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="angiosim")
    parser.add_argument("--version", action="version", version=f"angiosim {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def _add_overrides(p):
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--seed", type=_nonnegative_int, default=None)
        p.add_argument("--steps", type=_nonnegative_int, default=None)
        p.add_argument("--output-dir", type=str, default=None)
        p.add_argument("--snapshot-every", type=_positive_int, default=None)
        p.add_argument("--reaction-mode", choices=("explicit", "implicit-sinks"),
                       default=None)
        p.add_argument("--drift-cutoff", choices=("on", "off"), default=None)

    p_run = sub.add_parser("run", help="execute a simulation")
    _add_overrides(p_run)

    p_val = sub.add_parser("validate", help="run a short simulation with invariant checks")
    _add_overrides(p_val)

    p_conv = sub.add_parser("convergence", help="diffusion and quadrature order studies")
    p_conv.add_argument("--output", type=str, default="convergence.json")

    p_norm = sub.add_parser("normalize-check", help="source-kernel mass on refined grids")
    p_norm.add_argument("--h-values", type=str, default="10,5,2.5,1")
    return parser


def _resolve_config(args) -> SimConfig:
    if args.config is not None:
        config = load_config(Path(args.config).read_text())
    else:
        config = SimConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.steps is not None:
        overrides["n_steps"] = args.steps
    if args.output_dir is not None:
        overrides["output_dir"] = args.output_dir
    if args.snapshot_every is not None:
        overrides["snapshot_every"] = args.snapshot_every
    if args.reaction_mode is not None:
        overrides["reaction_mode"] = args.reaction_mode
    if args.drift_cutoff is not None:
        overrides["drift_cutoff"] = args.drift_cutoff == "on"
    if overrides:
        config = dataclasses.replace(config, **overrides)
    config.validate_grid(default_params())
    return config


def _cmd_run(args) -> int:
    config = _resolve_config(args)
    summary = run(config)
    print(f"steps={config.n_steps}")
    print(f"seed={config.seed}")
    print(f"output_dir={config.output_dir}")
    print(f"snapshots={len(summary.snapshots)}")
    final = summary.snapshots[-1]["fields"]
    for name in ("c_V", "c_D", "c_M", "c_U"):
        print(f"final_max_{name}={final[name]['max']:.9e}")
    print(f"summary={Path(config.output_dir) / 'summary.json'}")
    return 0


def _cmd_validate(args) -> int:
    config = _resolve_config(args)
    if args.steps is None:
        config = dataclasses.replace(config, n_steps=40)
    if args.reaction_mode is None:
        config = dataclasses.replace(config, reaction_mode="implicit-sinks")
    params = default_params()

    checks = {
        "containment": True,
        "fraction_partition_exact": True,
        "fraction_bounds": True,
        "fraction_monotone_decay": True,
        "concentrations_nonnegative": True,
        "growth_factor_max_nonincreasing": True,
    }
    state = init_state(config, params)
    grid = state.conc.c_V.grid
    mask = grid.mask
    prev_max = state.conc.c_V.values[mask].max()
    prev_fB = state.fracs.f_B.values.copy()
    prev_fF = state.fracs.f_F.values.copy()
    for _ in range(config.n_steps):
        state = advance(state, config, params)
        if state.cells.max_radius() > params.R:
            checks["containment"] = False
        fB, fF, fE = (state.fracs.f_B.values, state.fracs.f_F.values,
                      state.fracs.f_E.values)
        if not np.all((fB[mask] + fF[mask]) + fE[mask] == 1.0):
            checks["fraction_partition_exact"] = False
        for v in (fB, fF, fE):
            if v[mask].min() < 0.0 or v[mask].max() > 1.0:
                checks["fraction_bounds"] = False
        if np.any(fB > prev_fB) or np.any(fF > prev_fF):
            checks["fraction_monotone_decay"] = False
        for name in ("c_V", "c_D", "c_M", "c_U"):
            if state.conc.field(name).values[mask].min() < 0.0:
                checks["concentrations_nonnegative"] = False
        cur_max = state.conc.c_V.values[mask].max()
        if cur_max > prev_max:
            checks["growth_factor_max_nonincreasing"] = False
        prev_max = cur_max
        prev_fB, prev_fF = fB.copy(), fF.copy()

    ok = True
    for name, passed in checks.items():
        print(f"{name}={'pass' if passed else 'fail'}")
        ok = ok and passed
    return 0 if ok else 1


def _cmd_convergence(args) -> int:
    spatial = diffusion_spatial_study()
    temporal = diffusion_temporal_study()
    trapezoid = ode_trapezoid_oracle(lambda t: t * t, 1.0 / 3.0, s=1.0,
                                     total_time=1.0, taus=(0.25, 0.125, 0.0625))
    for report, label, res in ((spatial, "diffusion spatial", "h"),
                               (temporal, "diffusion temporal", "tau"),
                               (trapezoid, "fraction trapezoid", "tau")):
        print("\n".join(report.lines(label, res)), file=sys.stderr)
    print(f"spatial_order={spatial.order:.4f}")
    print(f"temporal_order={temporal.order:.4f}")
    print(f"trapezoid_order={trapezoid.order:.4f}")
    doc = {"spatial": spatial.as_dict(), "temporal": temporal.as_dict(),
           "trapezoid": trapezoid.as_dict()}
    Path(args.output).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"report={args.output}")
    return 0


def _cmd_normalize_check(args) -> int:
    try:
        hs = [float(tok) for tok in args.h_values.split(",") if tok]
    except ValueError:
        print("error: --h-values must be a comma-separated number list", file=sys.stderr)
        return 2
    norm = bump_normalizer()
    refined = bump_normalizer(rel_tol=1e-12)
    print(f"I={norm:.12f}")
    print(f"I_refinement_delta={abs(refined - norm):.3e}")
    params = default_params()
    pot = MollifierPotential(params.R_m)
    errors = []
    for h in hs:
        # small disk grid fully containing the kernel support
        R_small = 50.0
        grid = Grid(h, R_small)
        field = ScalarField(grid, deposit(grid, np.array([[0.0, 0.0]]), pot) * grid.mask)
        mass = integrate(field)
        err = abs(mass - 1.0)
        errors.append(err)
        print(f"integral_h{h:g}={mass:.9f}")
        print(f"error_h{h:g}={err:.3e}")
    monotone = all(a > b for a, b in zip(errors, errors[1:]))
    print(f"monotone={'true' if monotone else 'false'}")
    ok = monotone and (not hs or errors[-1] < 0.01)
    return 0 if ok else 1


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        if args.subcommand == "run":
            return _cmd_run(args)
        if args.subcommand == "validate":
            return _cmd_validate(args)
        if args.subcommand == "convergence":
            return _cmd_convergence(args)
        return _cmd_normalize_check(args)
    except (ValueError, SolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
