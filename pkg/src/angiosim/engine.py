"""Coupled time loop: rates -> concentrations -> fractions -> cell positions.

Each step assembles the cell-driven rate fields at the current positions,
advances the four concentration fields semi-implicitly, applies the
exponential fraction decay using the trapezoid of old and new enzyme
fields, and finally moves the cells by Euler-Maruyama reading the
freshest fields (configurable to start-of-step fields instead).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cells import (STALK, TIP, CellPopulation, DriftContext, StepNoise,
                    em_step, init_generator)
from .fractions import VolumeFractions, init_fractions, step_fractions
from .grid import Grid, ScalarField, integrate
from .params import ModelParams, SimConfig, default_params, dump_config
from .proteins import Concentrations, step_concentrations
from .sources import RateFields, assemble_rates

FIELD_NAMES = ("c_V", "c_D", "c_M", "c_U", "f_B", "f_F", "f_E")


@dataclass
class SimState:
    step: int
    time: float
    conc: Concentrations
    fracs: VolumeFractions
    cells: CellPopulation
    rates: RateFields  # assembled from the current cell positions

    def field(self, name: str) -> ScalarField:
        if name.startswith("c_"):
            return self.conc.field(name)
        return getattr(self.fracs, name)


def initial_growth_factor(grid: Grid, params: ModelParams) -> ScalarField:
    """Radially symmetric bump of height 0.1/e at the origin, support 0.75R."""
    rho = 0.75 * params.R
    r2 = grid.xs**2 + grid.ys**2
    inside = grid.mask & (r2 < rho**2)
    values = np.zeros((grid.n, grid.n))
    values[inside] = 0.1 * np.exp(-rho / np.sqrt(rho**2 - r2[inside]))
    return ScalarField(grid, values)


def init_state(config: SimConfig, params: ModelParams, rng=None) -> SimState:
    """Initial fields plus cells drawn uniformly in polar coordinates.

    (r, phi) ~ U([0.65R, 0.75R] x [0, pi/2]), X = (r sin phi, r cos phi);
    draw order is fixed: tip radii, tip angles, stalk radii, stalk angles.
    """
    config.validate_grid(params)
    grid = Grid(config.h, params.R)
    gen = rng if rng is not None else init_generator(config.seed)

    def _draw(count):
        r = gen.uniform(0.65 * params.R, 0.75 * params.R, count)
        phi = gen.uniform(0.0, np.pi / 2.0, count)
        return np.column_stack([r * np.sin(phi), r * np.cos(phi)])

    tips = _draw(config.n1)
    stalks = _draw(config.n2)
    cells = CellPopulation(tips=tips, stalks=stalks)

    conc = Concentrations(
        c_V=initial_growth_factor(grid, params),
        c_D=ScalarField.zeros(grid),
        c_M=ScalarField.zeros(grid),
        c_U=ScalarField.zeros(grid),
    )
    fracs = init_fractions(grid, params)
    rates = assemble_rates(cells.tips, cells.stalks, params, grid)
    return SimState(step=0, time=0.0, conc=conc, fracs=fracs, cells=cells,
                    rates=rates)


def advance(state: SimState, config: SimConfig, params: ModelParams,
            noise=None) -> SimState:
    """One coupled step; `noise` defaults to the seeded per-step substream."""
    conc_new = step_concentrations(state.conc, state.fracs, state.rates,
                                   config, params)
    fracs_new = step_fractions(state.fracs,
                               state.conc.c_M, conc_new.c_M,
                               state.conc.c_U, conc_new.c_U,
                               params, config.tau)
    if config.drift_fields == "new":
        ctx = DriftContext(conc_new, fracs_new, params,
                           drift_cutoff=config.drift_cutoff,
                           include_hertz=config.include_hertz)
    else:
        ctx = DriftContext(state.conc, state.fracs, params,
                           drift_cutoff=config.drift_cutoff,
                           include_hertz=config.include_hertz)
    if noise is None:
        noise = StepNoise(config.seed, state.step)
    cells_new = em_step(state.cells, ctx, config.tau, noise)
    grid = state.conc.c_V.grid
    rates_new = assemble_rates(cells_new.tips, cells_new.stalks, params, grid)
    step = state.step + 1
    return SimState(step=step, time=step * config.tau, conc=conc_new,
                    fracs=fracs_new, cells=cells_new, rates=rates_new)


# ---------------------------------------------------------------------------
# snapshot output and run summary


def _format_float(x: float) -> str:
    return repr(float(x))


def write_snapshot(state: SimState, config: SimConfig, params: ModelParams,
                   outdir: Path) -> Path:
    """step_<n>/ with one raw little-endian float64 file per field + meta + cells."""
    grid = state.conc.c_V.grid
    snap = outdir / f"step_{state.step}"
    snap.mkdir(parents=True, exist_ok=True)
    for name in FIELD_NAMES:
        payload = state.field(name).values.astype("<f8").tobytes()
        (snap / f"{name}.f64").write_bytes(payload)
    meta = {
        "grid_n": grid.n,
        "h": grid.h,
        "R": params.R,
        "step": state.step,
        "time_s": state.time,
        "fields": list(FIELD_NAMES),
        "build": __version__,
    }
    (snap / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")

    rows = ["step,time_s,kind,index,x_um,y_um"]
    for kind, pts in ((TIP, state.cells.tips), (STALK, state.cells.stalks)):
        for idx, (x, y) in enumerate(pts):
            rows.append(f"{state.step},{_format_float(state.time)},{kind},{idx},"
                        f"{_format_float(x)},{_format_float(y)}")
    (snap / "cells.csv").write_text("\n".join(rows) + "\n")
    return snap


def tip_nearest_stalk_means(cells: CellPopulation, count: int = 20) -> list[float]:
    """Per tip, the mean distance to its `count` nearest stalk cells."""
    out = []
    if len(cells.stalks) == 0:
        return [float("nan")] * len(cells.tips)
    k = min(count, len(cells.stalks))
    for tip in cells.tips:
        d = np.hypot(cells.stalks[:, 0] - tip[0], cells.stalks[:, 1] - tip[1])
        out.append(float(np.partition(d, k - 1)[:k].mean()))
    return out


def _snapshot_stats(state: SimState) -> dict:
    grid = state.conc.c_V.grid
    fields = {}
    for name in FIELD_NAMES:
        fld = state.field(name)
        active = fld.values[grid.mask]
        fields[name] = {
            "min": float(active.min()),
            "max": float(active.max()),
            "integral": integrate(fld),
        }
    return {
        "step": state.step,
        "time_s": state.time,
        "fields": fields,
        "tip_nearest20_mean": tip_nearest_stalk_means(state.cells),
    }


def _mark_visited(visited: np.ndarray, grid: Grid, tips: np.ndarray,
                  radius: float) -> None:
    """Set nodes within `radius` of any tip position."""
    if len(tips) == 0:
        return
    w = int(np.floor(radius / grid.h)) + 1
    offs = np.arange(-w, w + 1)
    oi, oj = np.meshgrid(offs, offs, indexing="ij")
    oi, oj = oi.ravel(), oj.ravel()
    ref = grid.axis[0]
    bi = np.rint((ref - tips[:, 0]) / grid.h).astype(int)
    bj = np.rint((ref - tips[:, 1]) / grid.h).astype(int)
    ii = np.clip(bi[:, None] + oi[None, :], 0, grid.n - 1)
    jj = np.clip(bj[:, None] + oj[None, :], 0, grid.n - 1)
    dx = grid.axis[ii] - tips[:, 0:1]
    dy = grid.axis[jj] - tips[:, 1:2]
    near = dx * dx + dy * dy <= radius * radius
    visited[ii[near], jj[near]] = True


@dataclass
class RunSummary:
    snapshots: list[dict]
    tip_visited: dict
    config_json: str

    def to_json(self) -> str:
        doc = {
            "build": __version__,
            "config": json.loads(self.config_json),
            "snapshots": self.snapshots,
            "tip_visited": self.tip_visited,
        }
        return json.dumps(doc, indent=2) + "\n"


def _visited_stats(visited: np.ndarray, grid: Grid,
                   initial: VolumeFractions, final: VolumeFractions) -> dict:
    sel = visited & grid.mask
    out = {"node_count": int(sel.sum())}
    for name in ("f_B", "f_F"):
        v0 = getattr(initial, name).values[sel]
        vT = getattr(final, name).values[sel]
        if v0.size == 0:
            out[name] = None
            continue
        out[name] = {
            "min_initial": float(v0.min()),
            "min_final": float(vT.min()),
            # largest pointwise drop; > 0 means degradation happened on the path
            "max_decrease": float((v0 - vT).max()),
        }
    return out


def run(config: SimConfig, params: ModelParams | None = None) -> RunSummary:
    """Full simulation: n_steps advances, periodic snapshots, JSON summary."""
    params = params if params is not None else default_params()
    state = init_state(config, params)
    grid = state.conc.c_V.grid
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    initial_fracs = state.fracs
    visited = np.zeros((grid.n, grid.n), dtype=bool)
    _mark_visited(visited, grid, state.cells.tips, params.R_m)

    snapshots = []
    write_snapshot(state, config, params, outdir)
    snapshots.append(_snapshot_stats(state))
    for _ in range(config.n_steps):
        state = advance(state, config, params)
        _mark_visited(visited, grid, state.cells.tips, params.R_m)
        if state.step % config.snapshot_every == 0 or state.step == config.n_steps:
            write_snapshot(state, config, params, outdir)
            snapshots.append(_snapshot_stats(state))

    summary = RunSummary(
        snapshots=snapshots,
        tip_visited=_visited_stats(visited, grid, initial_fracs, state.fracs),
        config_json=dump_config(config),
    )
    (outdir / "summary.json").write_text(summary.to_json())
    return summary
