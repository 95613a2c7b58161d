"""Release gate: every check the package must pass before a run is trusted.

Each test prints its measured numbers so a failure log shows how far off
the implementation is, not just that it is off.  The heavy multi-seed
sweep is shared between the containment and the sprouting-direction
checks through a module-scoped fixture.
"""

import time

import numpy as np
import pytest

from angiosim.engine import (advance, init_state, run, tip_nearest_stalk_means)
from angiosim.fractions import VolumeFractions, init_fractions
from angiosim.grid import Grid, ScalarField, integrate
from angiosim.oracles import (brownian_moment_oracle, dense_solve_oracle,
                              diffusion_spatial_study, diffusion_temporal_study,
                              ode_trapezoid_oracle)
from angiosim.params import SimConfig, default_params
from angiosim.proteins import (Concentrations, PentaSystem, assemble_system,
                               solve_system, step_concentrations)
from angiosim.sources import MollifierPotential, RateFields, bump_normalizer, deposit


@pytest.fixture(scope="module")
def ten_seed_sweep(params):
    """Ten full default runs (seeds 0..9), kept in memory: per-step max cell
    radius violations plus tip-to-stalk proximity at the first and last step."""
    results = []
    for seed in range(10):
        config = SimConfig(seed=seed)
        state = init_state(config, params)
        d_start = tip_nearest_stalk_means(state.cells)
        violations = 0
        for _ in range(config.n_steps):
            state = advance(state, config, params)
            if state.cells.max_radius() > params.R:
                violations += 1
        results.append({
            "seed": seed,
            "violations": violations,
            "d_start": d_start,
            "d_final": tip_nearest_stalk_means(state.cells),
        })
    return results


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    """One full default run (seed 42) through the snapshotting driver."""
    out = tmp_path_factory.mktemp("acceptance") / "run42"
    config = SimConfig(seed=42, output_dir=str(out))
    t0 = time.perf_counter()
    summary = run(config)
    return summary, time.perf_counter() - t0


def test_c01_diffusion_scheme_convergence():
    """Constant-D diffusion vs the closed-form zero-flux eigenmode:
    second order in h, first order in tau, under a minute."""
    t0 = time.perf_counter()
    spatial = diffusion_spatial_study()
    temporal = diffusion_temporal_study()
    elapsed = time.perf_counter() - t0
    for rep, label, res in ((spatial, "spatial", "h"), (temporal, "temporal", "tau")):
        print("\n".join(rep.lines(label, res)))
    print(f"elapsed={elapsed:.1f}s")
    assert spatial.order >= 1.9, f"spatial order {spatial.order:.3f} < 1.9"
    assert temporal.order >= 0.9, f"temporal order {temporal.order:.3f} < 0.9"
    assert elapsed < 60.0, f"convergence study took {elapsed:.1f}s"


def test_c02_zero_reaction_mass_conservation(params):
    """With every reaction rate zero, the stepped integral of the growth
    factor may drift only at the solver-tolerance level."""
    grid = Grid(10.0)
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(77)))
    c0 = np.where(grid.mask, gen.random((grid.n, grid.n)), 0.0)
    conc = Concentrations(ScalarField(grid, c0), ScalarField.zeros(grid),
                          ScalarField.zeros(grid), ScalarField.zeros(grid))
    fracs = init_fractions(grid, params)
    rates = RateFields.zeros(grid)
    config = SimConfig(h=10.0, tau=1.0, reaction_mode="explicit",
                       linear_tol=1e-14, linear_max_iter=2000)
    ref = integrate(conc.c_V)
    worst = 0.0
    for _ in range(1000):
        conc = step_concentrations(conc, fracs, rates, config, params)
        worst = max(worst, abs(integrate(conc.c_V) - ref) / abs(ref))
    print(f"max relative mass drift over 1000 steps: {worst:.3e}")
    assert worst <= 1e-12


def test_c03_implicit_sinks_structure_preserved(params):
    """Full default-length run in implicit-sinks mode: growth-factor max
    never rises, concentrations stay nonnegative, fractions stay a
    monotone exact partition of unity."""
    config = SimConfig(reaction_mode="implicit-sinks")
    state = init_state(config, params)
    mask = state.conc.c_V.grid.mask
    prev_max = state.conc.c_V.values[mask].max()
    prev_fB = state.fracs.f_B.values.copy()
    prev_fF = state.fracs.f_F.values.copy()
    bad = {"max_rise": 0, "negative_c": 0, "f_bounds": 0,
           "partition": 0, "f_rise": 0}
    for _ in range(config.n_steps):
        state = advance(state, config, params)
        cur_max = state.conc.c_V.values[mask].max()
        if cur_max > prev_max:
            bad["max_rise"] += 1
        prev_max = cur_max
        for name in ("c_V", "c_D", "c_M", "c_U"):
            if state.conc.field(name).values[mask].min() < 0.0:
                bad["negative_c"] += 1
        fB = state.fracs.f_B.values
        fF = state.fracs.f_F.values
        fE = state.fracs.f_E.values
        for v in (fB, fF, fE):
            if v[mask].min() < 0.0 or v[mask].max() > 1.0:
                bad["f_bounds"] += 1
        if not np.all((fB[mask] + fF[mask]) + fE[mask] == 1.0):
            bad["partition"] += 1
        if np.any(fB > prev_fB) or np.any(fF > prev_fF):
            bad["f_rise"] += 1
        prev_fB, prev_fF = fB.copy(), fF.copy()
    print(f"violation counts over {config.n_steps} steps: {bad}")
    assert all(v == 0 for v in bad.values()), bad


def test_c04_trapezoid_exponential_update():
    """Exponential fraction update: exact on constant and linear enzyme
    histories, second order on a quadratic one."""
    taus = (0.25, 0.125, 0.0625)
    const = ode_trapezoid_oracle(lambda t: 0.7, 0.7, 1.21, 1.0, taus)
    linear = ode_trapezoid_oracle(lambda t: t, 0.5, 1.21, 1.0, taus)
    quad = ode_trapezoid_oracle(lambda t: t * t, 1.0 / 3.0, 1.21, 1.0, taus)
    print(f"constant errors: {const.errors}")
    print(f"linear errors:   {linear.errors}")
    print(f"quadratic order: {quad.order:.3f}")
    assert const.errors == [0.0, 0.0, 0.0]
    assert linear.errors == [0.0, 0.0, 0.0]
    assert quad.order >= 1.9


def test_c05_brownian_noise_calibration():
    """Mean square displacement of 1e5 discrete Brownian paths matches
    2 sigma^2 m tau within three standard errors, in well under 30 s."""
    t0 = time.perf_counter()
    mean, se = brownian_moment_oracle(sigma=0.1, tau=1.0, m_steps=100,
                                      n_paths=10**5)
    elapsed = time.perf_counter() - t0
    target = 2.0 * 0.1**2 * 100 * 1.0
    print(f"mean={mean:.6f} target={target} se={se:.6f} elapsed={elapsed:.2f}s")
    assert abs(mean - target) <= 3.0 * se
    assert elapsed < 30.0


def test_c06_cg_matches_dense_elimination(params):
    """Fifty random SPD pentadiagonal systems (production-assembled and
    synthetic, both modes, every species): CG agrees with LAPACK."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(1234)))
    worst = 0.0
    for case in range(50):
        if case % 2 == 0:
            grid = Grid.full_square(20, 10.0) if case % 4 == 0 else Grid(10.0, 90.0)
            n = grid.n
            u = gen.random((3, n, n)) + 0.05
            fB, fF, fE = u / u.sum(axis=0)
            fracs = VolumeFractions(ScalarField(grid, np.where(grid.mask, fB, 0.0)),
                                    ScalarField(grid, np.where(grid.mask, fF, 0.0)),
                                    ScalarField(grid, np.where(grid.mask, fE, 0.0)))
            rates = RateFields(*(ScalarField(grid, 0.01 * gen.random((n, n)) * grid.mask)
                                 for _ in range(5)))
            c_old = ScalarField(grid, gen.random((n, n)) * grid.mask)
            c_V_old = ScalarField(grid, gen.random((n, n)) * grid.mask)
            species = "VDMU"[case % 4]
            mode = "implicit-sinks" if case % 8 < 4 else "explicit"
            config = SimConfig(h=10.0, reaction_mode=mode)
            system = assemble_system(c_old, fracs, rates, species, config, params,
                                     c_V_old=None if species == "V" else c_V_old)
        else:
            off_i = -gen.random((19, 20))
            off_j = -gen.random((20, 19))
            diag = gen.random((20, 20)) + 0.1
            diag[:-1, :] -= off_i
            diag[1:, :] -= off_i
            diag[:, :-1] -= off_j
            diag[:, 1:] -= off_j
            system = PentaSystem(diag=diag, off_i=off_i, off_j=off_j,
                                 rhs=gen.standard_normal((20, 20)),
                                 mask=np.ones((20, 20), dtype=bool))
        x_dense = dense_solve_oracle(system)
        x_cg, _ = solve_system(system, tol=1e-12, max_iter=2000)
        rel = np.max(np.abs(x_cg[system.mask] - x_dense)) / np.max(np.abs(x_dense))
        worst = max(worst, rel)
    print(f"worst relative discrepancy over 50 systems: {worst:.3e}")
    assert worst <= 1e-8


def test_c07_source_kernel_normalization(params):
    """Deposited kernel mass tends to one under grid refinement, and the
    quadrature constant behind it is stable to 1e-10."""
    drift = abs(bump_normalizer() - bump_normalizer(rel_tol=1e-12))
    pot = MollifierPotential(params.R_m)
    errors = []
    for h in (10.0, 5.0, 2.5, 1.0):
        grid = Grid(h, 50.0)
        field = ScalarField(grid, deposit(grid, np.array([[0.0, 0.0]]), pot) * grid.mask)
        errors.append(abs(integrate(field) - 1.0))
    print(f"normalizer refinement drift: {drift:.3e}")
    print(f"mass errors at h=10,5,2.5,1: {[f'{e:.3e}' for e in errors]}")
    assert drift <= 1e-10
    assert all(a > b for a, b in zip(errors, errors[1:])), "not monotone"
    assert errors[-1] < 0.01


def test_c08_cells_never_leave_domain(ten_seed_sweep, params):
    """Across ten seeded default runs no cell ever sits outside radius R."""
    total = sum(r["violations"] for r in ten_seed_sweep)
    print(f"containment violations across 10 runs: {total}")
    assert total == 0


def test_c09_degradation_follows_tip_paths(ten_seed_sweep, default_run):
    """Direction of the full experiment: membrane strictly degrades on
    tip-visited nodes, and stalks close in on tips in most seeds; one
    default run fits the five-minute budget."""
    summary, elapsed = default_run
    fB_block = summary.tip_visited["f_B"]
    print(f"seed 42 visited nodes: {summary.tip_visited['node_count']}, "
          f"largest f_B drop: {fB_block['max_decrease']:.4f}")
    assert fB_block["max_decrease"] > 0.0, "no membrane degradation on tip paths"

    closer = 0
    for r in ten_seed_sweep:
        if any(t < s for t, s in zip(r["d_final"], r["d_start"])):
            closer += 1
    print(f"seeds where a tip's nearest-20 stalk distance shrank: {closer}/10")
    assert closer >= 7

    print(f"default run elapsed: {elapsed:.1f}s")
    assert elapsed < 300.0


def test_c10_identical_runs_are_byte_identical(params, tmp_path, monkeypatch):
    """Same config and seed twice: every snapshot byte agrees."""
    roots = []
    for name in ("first", "second"):
        parent = tmp_path / name
        parent.mkdir()
        monkeypatch.chdir(parent)
        run(SimConfig(n_steps=40, snapshot_every=20, seed=7, output_dir="out"),
            params)
        roots.append(parent / "out")
    files_a = sorted(p.relative_to(roots[0]) for p in roots[0].rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(roots[1]) for p in roots[1].rglob("*") if p.is_file())
    assert files_a == files_b
    assert len(files_a) == 28, "3 snapshot dirs x 9 files + summary.json"
    mismatched = [str(rel) for rel in files_a
                  if (roots[0] / rel).read_bytes() != (roots[1] / rel).read_bytes()]
    print(f"files compared: {len(files_a)}, mismatched: {len(mismatched)}")
    assert mismatched == []
