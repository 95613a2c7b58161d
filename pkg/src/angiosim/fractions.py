"""Volume fractions of basement membrane, fibrin matrix, and fluid.

f_B and f_F decay by an exact exponential of the trapezoid-integrated
enzyme concentrations; f_E is always stored as 1 - (f_B + f_F), never
integrated, so the three fractions sum to one bitwise at active nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField
from .params import ModelParams

# Solver output may undershoot zero by roundoff; inputs this small are
# floored so decay factors stay <= 1.  Anything more negative is a real
# input error and is rejected.
NEG_GUARD = 1e-12


@dataclass
class VolumeFractions:
    f_B: ScalarField
    f_F: ScalarField
    f_E: ScalarField  # derived: 1 - (f_B + f_F) at active nodes, 0 outside

    def check_invariants(self) -> None:
        mask = self.f_B.grid.mask
        fB, fF, fE = self.f_B.values, self.f_F.values, self.f_E.values
        for name, v in (("f_B", fB), ("f_F", fF), ("f_E", fE)):
            if not np.all((v[mask] >= 0.0) & (v[mask] <= 1.0)):
                raise AssertionError(f"{name} leaves [0, 1]")
        # association matters: (f_B + f_F) + f_E reproduces 1.0 exactly
        if not np.all((fB[mask] + fF[mask]) + fE[mask] == 1.0):
            raise AssertionError("fractions do not sum to one exactly")

    def solid_fraction(self) -> ScalarField:
        """f_S = f_B + f_F, the drift-relevant solid part."""
        return ScalarField(self.f_B.grid, self.f_B.values + self.f_F.values)


def init_fractions(grid: Grid, params: ModelParams) -> VolumeFractions:
    """Initial fibrin plateau with cosine ramp; membrane at 20% of fibrin.

    f_F = 0.8 inside 0.7 R_f, ramps as 0.4 (1 - cos(pi (R_f-r)/(0.3 R_f)))
    out to R_f, and vanishes beyond.
    """
    r = np.hypot(grid.xs, grid.ys)
    R_f = params.R_f
    ramp = 0.4 * (1.0 - np.cos(np.pi * (R_f - r) / (0.3 * R_f)))
    fF = np.where(r <= 0.7 * R_f, 0.8, np.where(r < R_f, ramp, 0.0))
    fF = np.where(grid.mask, fF, 0.0)
    fB = 0.2 * fF
    fE = np.where(grid.mask, 1.0 - (fB + fF), 0.0)
    return VolumeFractions(ScalarField(grid, fB), ScalarField(grid, fF),
                           ScalarField(grid, fE))


def _floored(name: str, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    low = values[mask].min() if mask.any() else 0.0
    if low < -NEG_GUARD:
        raise ValueError(f"negative concentration input {name} (min {low:.3e})")
    return np.maximum(values, 0.0)


def step_fractions(f: VolumeFractions, c_M_old: ScalarField, c_M_new: ScalarField,
                   c_U_old: ScalarField, c_U_new: ScalarField,
                   params: ModelParams, tau: float) -> VolumeFractions:
    """One decay step: f_B *= exp(-s_B (tau/2)(c_M^n + c_M^{n+1})), f_F likewise with c_U.

    The decay factor is always in (0, 1], so positivity, the unit upper
    bound, and pointwise monotone decay hold unconditionally.
    """
    grid = f.f_B.grid
    mask = grid.mask
    cM0 = _floored("c_M old", c_M_old.values, mask)
    cM1 = _floored("c_M new", c_M_new.values, mask)
    cU0 = _floored("c_U old", c_U_old.values, mask)
    cU1 = _floored("c_U new", c_U_new.values, mask)

    fB = f.f_B.values * np.exp(-params.s_B * (tau / 2.0) * (cM0 + cM1))
    fF = f.f_F.values * np.exp(-params.s_F * (tau / 2.0) * (cU0 + cU1))
    fB = np.where(mask, fB, 0.0)
    fF = np.where(mask, fF, 0.0)
    fE = np.where(mask, 1.0 - (fB + fF), 0.0)
    return VolumeFractions(ScalarField(grid, fB), ScalarField(grid, fF),
                           ScalarField(grid, fE))
