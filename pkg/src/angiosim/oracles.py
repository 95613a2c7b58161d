"""Independent analytic and brute-force oracles used to pin test targets.

Everything here deliberately avoids the production solver paths: the
dense solve goes through LAPACK, the diffusion reference is a closed-form
eigenmode, the Brownian moment is plain Monte Carlo, and the quadrature
convergence fits are least squares on log-log ladders.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .fractions import VolumeFractions
from .grid import Grid, ScalarField
from .params import SimConfig, default_params
from .proteins import Concentrations, PentaSystem, step_concentrations
from .sources import RateFields


@dataclass
class ConvergenceReport:
    resolutions: list[float]
    errors: list[float]
    order: float

    def lines(self, label: str, res_name: str) -> list[str]:
        out = [f"{label} ({res_name} ladder)"]
        out += [f"  {res_name}={r:<10g} error={e:.6e}"
                for r, e in zip(self.resolutions, self.errors)]
        out.append(f"  observed order: {self.order:.3f}")
        return out

    def as_dict(self) -> dict:
        return {"resolutions": list(map(float, self.resolutions)),
                "errors": list(map(float, self.errors)),
                "order": float(self.order)}


def fit_order(resolutions, errors) -> float:
    """Least-squares slope of log(error) against log(resolution).

    All-zero errors mean the scheme is exact on this ladder; report inf.
    """
    errors = np.asarray(errors, dtype=float)
    if np.all(errors == 0.0):
        return float("inf")
    if np.any(errors <= 0.0):
        return float("nan")
    slope = np.polyfit(np.log(np.asarray(resolutions, float)), np.log(errors), 1)[0]
    return float(slope)


def analytic_heat_mode(diffusivity: float, side: float, t: float, x, y):
    """Decaying zero-flux eigenmode on [0, side]^2, offset to stay positive.

    u(x, y, t) = cos(pi x/side) cos(pi y/side) exp(-2 D (pi/side)^2 t) + 1.
    """
    decay = math.exp(-2.0 * diffusivity * (math.pi / side) ** 2 * t)
    return np.cos(np.pi * np.asarray(x) / side) * np.cos(np.pi * np.asarray(y) / side) * decay + 1.0


def dense_solve_oracle(system: PentaSystem) -> np.ndarray:
    """LAPACK dense solve over active nodes; verifies its own residual."""
    A, b = system.dense()
    if len(b) > 2500:
        raise ValueError("dense oracle limited to 2500 active nodes")
    x = np.linalg.solve(A, b)
    b_norm = np.linalg.norm(b)
    if b_norm > 0.0:
        rel = np.linalg.norm(b - A @ x) / b_norm
        if rel > 1e-12:
            raise RuntimeError(f"dense oracle residual {rel:.3e} too large")
    return x


def brownian_moment_oracle(sigma: float, tau: float, m_steps: int, n_paths: int,
                           seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo mean of |X_m - X_0|^2 for 2D Brownian paths, plus its SE.

    Analytic target: 2 sigma^2 m tau.
    """
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    disp = np.zeros((n_paths, 2))
    step_scale = sigma * math.sqrt(tau)
    for _ in range(m_steps):
        disp += step_scale * gen.standard_normal((n_paths, 2))
    sq = disp[:, 0] ** 2 + disp[:, 1] ** 2
    mean = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(n_paths))
    return mean, se


def ode_trapezoid_oracle(c, exact_integral: float, s: float, total_time: float,
                         taus) -> ConvergenceReport:
    """Stepped exponential-decay factor vs exp(-s * integral of c).

    The per-step trapezoid contributions are accumulated in the exponent
    and exponentiated once, which is what makes the update exact (to the
    last bit, for dyadic tau) on constant and linear histories.
    """
    target = math.exp(-s * exact_integral)
    errors = []
    for tau in taus:
        n = round(total_time / tau)
        if abs(n * tau - total_time) > 1e-12:
            raise ValueError(f"tau={tau} does not divide the interval")
        terms = np.array([(tau / 2.0) * (c(i * tau) + c((i + 1) * tau))
                          for i in range(n)])
        # binary-tree reduction: for dyadic tau, equal partial sums only
        # ever double, so constant and linear histories sum without rounding
        width = 1
        while width < len(terms):
            width *= 2
        terms = np.concatenate([terms, np.zeros(width - len(terms))])
        while len(terms) > 1:
            terms = terms[0::2] + terms[1::2]
        errors.append(abs(math.exp(-s * float(terms[0])) - target))
    return ConvergenceReport(list(taus), errors, fit_order(taus, errors))


# ---------------------------------------------------------------------------
# diffusion-scheme convergence studies (production solver vs the eigenmode)


def _pure_diffusion_run(n: int, h: float, tau: float, steps: int,
                        diffusivity_field_value: float, side: float,
                        tol: float = 1e-12):
    """March the production solver on a full square with constant D and no reactions."""
    grid = Grid.full_square(n, h)
    # f = (1, 0, 0) makes the mixed growth-factor diffusivity exactly D_V_B
    params = dataclasses.replace(default_params(), D_V_B=diffusivity_field_value)
    ones = np.ones((n, n))
    zeros = np.zeros((n, n))
    fracs = VolumeFractions(ScalarField(grid, ones), ScalarField(grid, zeros.copy()),
                            ScalarField(grid, zeros.copy()))
    rates = RateFields.zeros(grid)
    config = SimConfig(h=h, tau=tau, n_steps=steps, reaction_mode="explicit",
                       linear_tol=tol, linear_max_iter=4000)

    centers = (np.arange(n) + 0.5) * h  # cell-centered sampling of [0, side]
    X, Y = np.meshgrid(centers, centers, indexing="ij")
    c0 = analytic_heat_mode(diffusivity_field_value, side, 0.0, X, Y)
    conc = Concentrations(ScalarField(grid, c0.copy()), ScalarField(grid, zeros.copy()),
                          ScalarField(grid, zeros.copy()), ScalarField(grid, zeros.copy()))
    for _ in range(steps):
        conc = step_concentrations(conc, fracs, rates, config, params)
    exact = analytic_heat_mode(diffusivity_field_value, side, steps * tau, X, Y)
    return float(np.max(np.abs(conc.c_V.values - exact)))


def diffusion_spatial_study(hs=(20.0, 10.0, 5.0), side: float = 1000.0,
                            diffusivity: float = 100.0, total_time: float = 100.0,
                            tau_scale: float = 0.01) -> ConvergenceReport:
    """h-refinement with tau proportional to h^2 (both error terms scale as h^2)."""
    errors = []
    for h in hs:
        n = round(side / h)
        tau = tau_scale * h * h
        steps = round(total_time / tau)
        errors.append(_pure_diffusion_run(n, h, tau, steps, diffusivity, side))
    return ConvergenceReport(list(hs), errors, fit_order(hs, errors))


def diffusion_temporal_study(taus=(4.0, 2.0, 1.0), h: float = 10.0,
                             side: float = 1000.0, diffusivity: float = 100.0,
                             total_time: float = 400.0) -> ConvergenceReport:
    """tau-refinement at fixed h; the O(h^2) bias sits well below the O(tau) term."""
    n = round(side / h)
    errors = []
    for tau in taus:
        steps = round(total_time / tau)
        errors.append(_pure_diffusion_run(n, h, tau, steps, diffusivity, side))
    return ConvergenceReport(list(taus), errors, fit_order(taus, errors))
