"""Tip/stalk cell drift, noise profile, and the Euler-Maruyama update.

Tips climb the growth-factor gradient, stalks the chemokine gradient;
both feel durotaxis along the solid-fraction gradient and a pairwise
exponential repulsion.  The noise amplitude is flat (1/10) in the core
and tapers to zero along a quarter-circle profile in the outer tenth of
the domain, so the wall is noise-absorbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fractions import VolumeFractions
from .grid import ScalarField, gradient_at, interpolate_at, node_gradients
from .params import ModelParams
from .proteins import Concentrations

TIP, STALK = "tip", "stalk"
_KIND_ID = {TIP: 0, STALK: 1}

# substream domains for the counter-based generator keying
_DOMAIN_INIT = 0
_DOMAIN_STEP = 1


def _generator(seed: int, spawn_key: tuple[int, ...]) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


def init_generator(seed: int) -> np.random.Generator:
    """Stream used once for the initial cell placement."""
    return _generator(seed, (_DOMAIN_INIT,))


class StepNoise:
    """Gaussian increments for one step, keyed by (seed, kind, step index).

    Each population draws one block of 2N standard normals per step; cell
    k always consumes slots (2k, 2k+1), so trajectories do not depend on
    evaluation order and tips/stalks have independent substreams.
    """

    def __init__(self, seed: int, step: int):
        self.seed = int(seed)
        self.step = int(step)

    def normals(self, kind: str, count: int) -> np.ndarray:
        gen = _generator(self.seed, (_DOMAIN_STEP, _KIND_ID[kind], self.step))
        return gen.standard_normal(count)


class ZeroNoise:
    """Deterministic test double: no stochastic displacement."""

    def normals(self, kind: str, count: int) -> np.ndarray:
        return np.zeros(count)


@dataclass
class CellPopulation:
    tips: np.ndarray    # (n1, 2) um
    stalks: np.ndarray  # (n2, 2) um

    def __post_init__(self):
        self.tips = np.atleast_2d(np.asarray(self.tips, dtype=float)).reshape(-1, 2)
        self.stalks = np.atleast_2d(np.asarray(self.stalks, dtype=float)).reshape(-1, 2)

    def all_positions(self) -> np.ndarray:
        return np.concatenate([self.tips, self.stalks], axis=0)

    def max_radius(self) -> float:
        pts = self.all_positions()
        if len(pts) == 0:
            return 0.0
        return float(np.hypot(pts[:, 0], pts[:, 1]).max())


def sigma_profile(p, params: ModelParams):
    """Isotropic noise amplitude (um/sqrt(s)) as a function of position.

    1/10 for |x| <= 0.9R, zero for |x| >= R, and a quarter-circle arc in
    between: sqrt((R/10)^2 - (R/10 - (R - |x|))^2) / R, which meets both
    plateaus continuously.
    """
    p = np.asarray(p, dtype=float)
    r = np.hypot(p[..., 0], p[..., 1])
    R = params.R
    a = R / 10.0
    gap = np.clip(a - (R - r), 0.0, a)       # 0 on the core, a at the wall
    arc = np.sqrt(np.maximum(a * a - gap * gap, 0.0)) / R
    return np.where(r <= 0.9 * R, 0.1, np.where(r >= R, 0.0, arc))


def drift_cutoff_factor(p, params: ModelParams):
    """sigma/0.1: exactly 1 in the core, 0 at the wall."""
    return sigma_profile(p, params) / 0.1


@dataclass
class DriftContext:
    """Frozen fields a drift evaluation reads, plus cached node gradients."""

    conc: Concentrations
    fracs: VolumeFractions
    params: ModelParams
    drift_cutoff: bool = True
    include_hertz: bool = False
    _grad_cache: dict = field(default_factory=dict, repr=False)

    def gradient_field(self, name: str):
        if name not in self._grad_cache:
            if name == "f_S":
                fld = self.fracs.solid_fraction()
            else:
                fld = self.conc.field(name)
            self._grad_cache[name] = (fld, node_gradients(fld))
        return self._grad_cache[name]

    def grad_at(self, name: str, pts: np.ndarray) -> np.ndarray:
        fld, grads = self.gradient_field(name)
        return gradient_at(fld, pts, grads=grads)


def _strain_sums(P: np.ndarray, params: ModelParams, include_hertz: bool):
    """Pairwise kernel row sums and resultant directions for all cells.

    Returns (S, u): S[k] = sum over other cells of exp(-d/R_c) (plus the
    optional contact correction), u[k] the unit resultant of the
    kernel-weighted unit displacements.  The self pair is excluded;
    coincident distinct cells contribute 1 to S but are skipped in u.
    """
    N = len(P)
    Rc = params.R_c
    diff = P[:, None, :] - P[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    K = np.exp(-d / Rc)
    np.fill_diagonal(K, 0.0)
    S = K.sum(axis=1)
    if include_hertz:
        overlap = np.maximum(0.0, Rc - 0.5 * d) / Rc
        hertz = (2.0 * np.sqrt(2.0) / np.pi) * overlap**2.5
        np.fill_diagonal(hertz, 0.0)
        S = S - hertz.sum(axis=1)
    safe = np.where(d > 0.0, d, 1.0)
    unit = diff / safe[..., None]
    unit[d == 0.0] = 0.0                      # covers the diagonal too
    v = (K[..., None] * unit).sum(axis=1)
    vnorm = np.hypot(v[:, 0], v[:, 1])
    safe_n = np.where(vnorm == 0.0, 1.0, vnorm)
    u = np.where(vnorm[:, None] > 0.0, v / safe_n[:, None], 0.0)
    return S, u


def strain_energy(kind: str, index: int, pop: CellPopulation, f_E_at_cell: float,
                  params: ModelParams, include_hertz: bool = False):
    """(M, z) for one cell: interaction magnitude and its unit direction."""
    P = pop.all_positions()
    S, u = _strain_sums(P, params, include_hertz)
    pref = params.F_i**2 / (20.0 * np.pi**2 * params.R_c**4) * (1.0 - f_E_at_cell)
    row = index if kind == TIP else len(pop.tips) + index
    return float(pref * S[row]), u[row]


def drift_all(pop: CellPopulation, ctx: DriftContext) -> tuple[np.ndarray, np.ndarray]:
    """Drift vectors (um/s) for every tip and stalk under frozen fields."""
    params = ctx.params
    n1 = len(pop.tips)
    P = pop.all_positions()
    if len(P) == 0:
        return np.zeros((0, 2)), np.zeros((0, 2))

    fB = interpolate_at(ctx.fracs.f_B, P)
    fF = interpolate_at(ctx.fracs.f_F, P)
    fE = interpolate_at(ctx.fracs.f_E, P)

    g = np.zeros_like(P)
    # pairwise repulsion; the kernel vanishes identically when F_i = 0
    if params.F_i != 0.0 and len(P) > 1:
        S, u = _strain_sums(P, params, ctx.include_hertz)
        pref = params.F_i**2 / (20.0 * np.pi**2 * params.R_c**4) * (1.0 - fE)
        alpha0 = params.b_i * params.R_c**3 / (params.F_i * params.mu)
        g += alpha0 * (pref * S)[:, None] * u

    # chemotaxis: tips read the growth factor, stalks the chemokine
    gamma = 0.1 * params.b_i * params.F_i * (1.0 - fE) / (
        params.rho_B * fB + params.rho_F * fF + params.rho_E * fE)
    if n1 > 0:
        g[:n1] += gamma[:n1, None] * ctx.grad_at("c_V", P[:n1])
    if len(P) > n1:
        g[n1:] += gamma[n1:, None] * ctx.grad_at("c_D", P[n1:])

    # durotaxis along the solid-fraction gradient
    lam = (4.0**3 * params.b_i * params.F_i * params.lambda_tilde / 30.0) \
        * (1.0 - fE) * (0.5 - fE) * fE
    g += lam[:, None] * ctx.grad_at("f_S", P)

    if ctx.drift_cutoff:
        g *= drift_cutoff_factor(P, params)[:, None]
    return g[:n1], g[n1:]


def drift(kind: str, index: int, pop: CellPopulation, ctx: DriftContext) -> np.ndarray:
    """Drift of a single cell; see drift_all."""
    g_tips, g_stalks = drift_all(pop, ctx)
    return g_tips[index] if kind == TIP else g_stalks[index]


def _contain(X: np.ndarray, R: float) -> np.ndarray:
    """Radially project onto the closed disk; nudge inward until |X| <= R bitwise."""
    r = np.hypot(X[:, 0], X[:, 1])
    over = r > R
    if not np.any(over):
        return X
    X = X.copy()
    X[over] *= (R / r[over])[:, None]
    while True:
        r = np.hypot(X[:, 0], X[:, 1])
        over = r > R
        if not np.any(over):
            return X
        X[over] *= 1.0 - 2.0**-52


def em_step(pop: CellPopulation, ctx: DriftContext, tau: float, noise) -> CellPopulation:
    """X^{n+1} = X^n + g tau + sigma(X^n) sqrt(tau) xi, then containment."""
    params = ctx.params
    g_tips, g_stalks = drift_all(pop, ctx)
    sqrt_tau = np.sqrt(tau)
    out = {}
    for kind, X, g in ((TIP, pop.tips, g_tips), (STALK, pop.stalks, g_stalks)):
        if len(X) == 0:
            out[kind] = X.copy()
            continue
        xi = noise.normals(kind, 2 * len(X)).reshape(-1, 2)
        sig = sigma_profile(X, params)
        X_new = X + tau * g + sqrt_tau * sig[:, None] * xi
        out[kind] = _contain(X_new, params.R)
    return CellPopulation(tips=out[TIP], stalks=out[STALK])
