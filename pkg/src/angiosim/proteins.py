"""Semi-implicit update of the four protein concentration fields.

Diffusion is implicit with arithmetic-mean face diffusivities frozen at
the start of the step; faces crossing the disk boundary carry zero flux.
Reactions are explicit by default ("explicit" mode); "implicit-sinks"
moves the nonnegative sink coefficients onto the matrix diagonal, which
makes every system an M-matrix and the update positivity-preserving.
Each solve is hand-rolled Jacobi-preconditioned conjugate gradients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fractions import NEG_GUARD, VolumeFractions
from .grid import Grid, ScalarField
from .params import ModelParams, SimConfig
from .sources import RateFields

log = logging.getLogger("angiosim")

SPECIES = ("V", "D", "M", "U")


class SolverError(RuntimeError):
    pass


def mix_diffusivity(f, species: str, params: ModelParams):
    """Convex-combination diffusivity D_B f_B + D_F f_F + D_E f_E.

    `f` is the (f_B, f_F, f_E) triple, scalars or arrays.  The result lies
    between the smallest and largest phase constant, so the operators stay
    uniformly elliptic.
    """
    fB, fF, fE = f
    D_B, D_F, D_E = params.diffusivity_triple(species)
    return D_B * fB + D_F * fF + D_E * fE


@dataclass
class PentaSystem:
    """Symmetric pentadiagonal operator over the grid, plus right-hand side.

    diag is the full (n, n) main diagonal (1.0 on inactive rows), off_i
    couples (i, j) with (i+1, j), off_j couples (i, j) with (i, j+1); both
    are nonpositive and vanish on faces that touch an inactive node.
    """

    diag: np.ndarray   # (n, n)
    off_i: np.ndarray  # (n-1, n)
    off_j: np.ndarray  # (n, n-1)
    rhs: np.ndarray    # (n, n), zero at inactive nodes
    mask: np.ndarray   # (n, n) bool

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = self.diag * x
        out[:-1, :] += self.off_i * x[1:, :]
        out[1:, :] += self.off_i * x[:-1, :]
        out[:, :-1] += self.off_j * x[:, 1:]
        out[:, 1:] += self.off_j * x[:, :-1]
        return out

    def residual_norm(self, x: np.ndarray) -> float:
        r = self.rhs - self.matvec(x)
        return float(np.linalg.norm(r))

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense matrix and rhs restricted to active nodes, row-major order."""
        n = self.diag.shape[0]
        idx = -np.ones((n, n), dtype=int)
        act = np.argwhere(self.mask)
        idx[self.mask] = np.arange(len(act))
        m = len(act)
        A = np.zeros((m, m))
        A[np.arange(m), np.arange(m)] = self.diag[self.mask]
        for i in range(n - 1):
            for j in range(n):
                a, b = idx[i, j], idx[i + 1, j]
                if a >= 0 and b >= 0 and self.off_i[i, j] != 0.0:
                    A[a, b] = A[b, a] = self.off_i[i, j]
        for i in range(n):
            for j in range(n - 1):
                a, b = idx[i, j], idx[i, j + 1]
                if a >= 0 and b >= 0 and self.off_j[i, j] != 0.0:
                    A[a, b] = A[b, a] = self.off_j[i, j]
        return A, self.rhs[self.mask]


def assemble_system(c_old: ScalarField, f_old: VolumeFractions, rates: RateFields,
                    species: str, config: SimConfig, params: ModelParams,
                    c_V_old: ScalarField | None = None) -> PentaSystem:
    """Build (I + tau*diffusion [+ tau*sinks]) c^{n+1} = c^n + tau*explicit terms.

    Face diffusivity is the arithmetic mean of the node diffusivities at
    time n.  Production of D/M/U uses the start-of-step growth-factor
    field c_V_old, keeping the four species decoupled within one step.
    """
    if species not in SPECIES:
        raise ValueError(f"unknown species {species!r}")
    grid = c_old.grid
    mask = grid.mask
    c = c_old.values
    if not np.all(np.isfinite(c[mask])):
        raise ValueError("non-finite concentration input")
    tau, h = config.tau, grid.h

    D = mix_diffusivity((f_old.f_B.values, f_old.f_F.values, f_old.f_E.values),
                        species, params)
    r = tau / h**2
    open_i = mask[:-1, :] & mask[1:, :]
    open_j = mask[:, :-1] & mask[:, 1:]
    w_i = np.where(open_i, r * 0.5 * (D[:-1, :] + D[1:, :]), 0.0)
    w_j = np.where(open_j, r * 0.5 * (D[:, :-1] + D[:, 1:]), 0.0)

    diag_flux = np.zeros_like(c)
    diag_flux[:-1, :] += w_i
    diag_flux[1:, :] += w_i
    diag_flux[:, :-1] += w_j
    diag_flux[:, 1:] += w_j

    if species == "V":
        sink = rates.alpha_V.values
        prod = 0.0
    else:
        if c_V_old is None:
            raise ValueError("species D/M/U need the start-of-step c_V field")
        cV = c_V_old.values
        if species == "D":
            sink = rates.beta_D.values
            prod = rates.alpha_D.values * cV
        elif species == "M":
            sink = params.s_M * f_old.f_B.values
            prod = rates.alpha_M.values * cV
        else:
            sink = params.s_U * f_old.f_F.values
            prod = rates.alpha_U.values * cV

    rhs = c + tau * prod
    if config.reaction_mode == "implicit-sinks":
        diag = 1.0 + diag_flux + tau * sink
    else:
        diag = 1.0 + diag_flux
        rhs = rhs - tau * sink * c
    diag = np.where(mask, diag, 1.0)
    rhs = np.where(mask, rhs, 0.0)
    return PentaSystem(diag=diag, off_i=-w_i, off_j=-w_j, rhs=rhs, mask=mask)


def solve_system(system: PentaSystem, tol: float = 1e-10, max_iter: int = 500,
                 x0: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Jacobi-preconditioned CG to relative residual <= tol.

    Returns (solution, iterations).  The iterate sequence is a fixed
    arithmetic order, so repeated calls are bit-identical.  Convergence by
    the recurrence residual is confirmed against the true residual before
    returning; non-convergence raises SolverError with the final residual.
    """
    b = system.rhs
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), 0
    minv = 1.0 / system.diag
    x = np.where(system.mask, x0, 0.0) if x0 is not None else np.zeros_like(b)
    r = b - system.matvec(x)
    if float(np.linalg.norm(r)) <= tol * b_norm:
        return x, 0
    z = minv * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    for k in range(1, max_iter + 1):
        Ap = system.matvec(p)
        alpha = rz / float(np.vdot(p, Ap))
        x = x + alpha * p
        r = r - alpha * Ap
        if float(np.linalg.norm(r)) <= tol * b_norm:
            true_r = b - system.matvec(x)
            if float(np.linalg.norm(true_r)) <= tol * b_norm:
                return x, k
            r = true_r  # recurrence drifted; restart from the true residual
        z = minv * r
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG did not reach tol={tol:g} in {max_iter} iterations "
        f"(relative residual {system.residual_norm(x) / b_norm:.3e})")


@dataclass
class Concentrations:
    c_V: ScalarField
    c_D: ScalarField
    c_M: ScalarField
    c_U: ScalarField

    FIELD_NAMES = ("c_V", "c_D", "c_M", "c_U")

    @classmethod
    def zeros(cls, grid: Grid) -> "Concentrations":
        return cls(*(ScalarField.zeros(grid) for _ in range(4)))

    def field(self, name: str) -> ScalarField:
        if name not in self.FIELD_NAMES:
            raise ValueError(f"unknown concentration field {name!r}")
        return getattr(self, name)


def step_concentrations(c_old: Concentrations, f_old: VolumeFractions,
                        rates: RateFields, config: SimConfig,
                        params: ModelParams) -> Concentrations:
    """One semi-implicit step for all four species (V solved first).

    In implicit-sinks mode the output is floored at zero inside a small
    roundoff guard (the exact-arithmetic solution is nonnegative; CG can
    undershoot by ~1e-15).  In explicit mode negatives are only reported.
    """
    out = {}
    for species in SPECIES:
        name = f"c_{species}"
        c_this = c_old.field(name)
        system = assemble_system(c_this, f_old, rates, species, config, params,
                                 c_V_old=None if species == "V" else c_old.c_V)
        try:
            x, iters = solve_system(system, tol=config.linear_tol,
                                    max_iter=config.linear_max_iter,
                                    x0=c_this.values)
        except SolverError as exc:
            raise SolverError(f"{name}: {exc}") from exc
        log.debug("solve %s: %d iterations", name, iters)

        low_idx = np.unravel_index(np.argmin(np.where(system.mask, x, np.inf)), x.shape)
        low = float(x[low_idx])
        node = (int(low_idx[0]), int(low_idx[1]))
        if low < 0.0:
            if config.reaction_mode == "implicit-sinks":
                if low < -NEG_GUARD:
                    raise SolverError(
                        f"{name}: negative value {low:.3e} at node {node} "
                        "exceeds the roundoff guard")
                x = np.maximum(x, 0.0)
            else:
                log.warning("%s: negative value %.3e at node %s (explicit reactions)",
                            name, low, node)
        out[name] = ScalarField(c_this.grid, np.where(system.mask, x, 0.0))
    return Concentrations(**out)
