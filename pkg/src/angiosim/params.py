"""Model constants and run configuration.

All arithmetic is done on raw floats in a fixed unit system (micrometres,
seconds, nanograms, nanonewtons); units appear in comments and docstrings
only.  Config files are a single flat JSON object with ``SimConfig`` keys.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

REACTION_MODES = ("explicit", "implicit-sinks")
DRIFT_FIELD_MODES = ("new", "old")


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the reference parameter set.

    Diffusivities follow the naming D_<species>_<phase> with species in
    {V, D, M, U} (growth factor, chemokine, membrane-degrading enzyme,
    fibrin-degrading enzyme) and phase in {B, F, E} (basement membrane,
    fibrin matrix, extracellular fluid).
    """

    b_i: float = 0.02            # 1/s, cell motility rate
    F_i: float = 1000.0          # nN, cell traction force
    mu: float = 0.2              # dimensionless friction
    lambda_tilde: float = 15.0   # dimensionless durotaxis weight
    R_c: float = 11.25           # um, cell interaction radius

    rho_B: float = 1.06e-3       # ng/um^3
    rho_F: float = 1.06e-3       # ng/um^3
    rho_E: float = 0.9933e-3     # ng/um^3

    D_V_B: float = 100.0         # um^2/s
    D_V_F: float = 200.0
    D_V_E: float = 10.0
    D_D_B: float = 0.51
    D_D_F: float = 1.02
    D_D_E: float = 0.051
    D_M_B: float = 1.23
    D_M_F: float = 2.46
    D_M_E: float = 0.123
    D_U_B: float = 0.53
    D_U_F: float = 1.06
    D_U_E: float = 0.053

    r_D: float = 10.0            # um^3/s, chemokine production scale
    r_M: float = 10.0            # um^3/s
    r_U: float = 10.0            # um^3/s
    s_V: float = 0.024           # um^3/s, growth-factor uptake scale
    s_D: float = 0.024           # um^3/s, chemokine uptake scale
    s_M: float = 0.024           # 1/s, enzyme-membrane sink coefficient
    s_U: float = 0.024           # 1/s, enzyme-fibrin sink coefficient
    s_B: float = 1.21            # um^3/(ng s), membrane degradation rate
    s_F: float = 1.21            # um^3/(ng s), fibrin degradation rate

    R: float = 500.0             # um, domain radius
    R_m: float = 12.5            # um, source kernel radius
    R_f: float = 375.0           # um, fibrin plateau radius (0.75 R)

    def __post_init__(self):
        for name in ("D_V_B", "D_V_F", "D_V_E", "D_D_B", "D_D_F", "D_D_E",
                     "D_M_B", "D_M_F", "D_M_E", "D_U_B", "D_U_F", "D_U_E"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"diffusivity {name} must be positive")
        for name in ("r_D", "r_M", "r_U", "s_V", "s_D", "s_M", "s_U",
                     "s_B", "s_F", "b_i"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"rate constant {name} must be nonnegative")
        for name in ("rho_B", "rho_F", "rho_E", "mu", "R", "R_c"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not self.R_m < self.R:
            raise ValueError("R_m must be smaller than the domain radius R")
        if not 0.0 < self.R_f <= self.R:
            raise ValueError("R_f must lie in (0, R]")

    def diffusivity_triple(self, species: str) -> tuple[float, float, float]:
        """(D_B, D_F, D_E) for one species tag in {V, D, M, U}."""
        if species not in ("V", "D", "M", "U"):
            raise ValueError(f"unknown species {species!r}")
        return (getattr(self, f"D_{species}_B"),
                getattr(self, f"D_{species}_F"),
                getattr(self, f"D_{species}_E"))


def default_params() -> ModelParams:
    return ModelParams()


@dataclass(frozen=True)
class SimConfig:
    """Run configuration; everything a run needs besides ModelParams."""

    h: float = 10.0              # um, grid spacing
    tau: float = 1.0             # s, time step
    n_steps: int = 1600
    n1: int = 2                  # tip cells
    n2: int = 200                # stalk cells
    seed: int = 42
    snapshot_every: int = 400
    reaction_mode: str = "explicit"
    drift_cutoff: bool = True
    output_dir: str = "out"
    linear_tol: float = 1e-10    # relative residual for the CG solves
    linear_max_iter: int = 500
    include_hertz: bool = False  # add the contact-correction term to the strain sum
    drift_fields: str = "new"    # drift samples end-of-step ("new") or start-of-step ("old") fields

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("h must be positive")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("cell counts must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.reaction_mode not in REACTION_MODES:
            raise ValueError(f"reaction_mode must be one of {REACTION_MODES}")
        if not 0.0 < self.linear_tol < 1.0:
            raise ValueError("linear_tol must lie in (0, 1)")
        if self.linear_max_iter < 1:
            raise ValueError("linear_max_iter must be >= 1")
        if self.drift_fields not in DRIFT_FIELD_MODES:
            raise ValueError(f"drift_fields must be one of {DRIFT_FIELD_MODES}")

    def validate_grid(self, params: ModelParams) -> None:
        """Check that h tiles the domain radius into an integer index half-width."""
        k = params.R / self.h
        if abs(k - round(k)) > 1e-9 or round(k) < 1:
            raise ValueError(f"h={self.h} does not divide the domain radius R={params.R}")


_FIELD_TYPES = {
    "h": float, "tau": float, "linear_tol": float,
    "n_steps": int, "n1": int, "n2": int, "seed": int,
    "snapshot_every": int, "linear_max_iter": int,
    "reaction_mode": str, "output_dir": str, "drift_fields": str,
    "drift_cutoff": bool, "include_hertz": bool,
}


def load_config(document, params: ModelParams | None = None) -> SimConfig:
    """Parse a config from JSON text (or an already-parsed dict).

    Unknown keys are rejected by name; missing keys take defaults; value
    types and all SimConfig invariants are validated, including that h
    divides the domain radius of `params` (defaults when omitted).
    """
    if isinstance(document, (str, bytes)):
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config is not valid JSON: {exc}") from exc
    elif isinstance(document, dict):
        raw = dict(document)
    elif document is None:
        raw = {}
    else:
        raise TypeError("config document must be JSON text or a dict")
    if not isinstance(raw, dict):
        raise ValueError("config must be a single JSON object")

    kwargs = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        want = _FIELD_TYPES[key]
        if want is bool:
            if not isinstance(value, bool):
                raise ValueError(f"config key {key!r} must be a boolean")
        elif want is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"config key {key!r} must be an integer")
        elif want is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"config key {key!r} must be a number")
            value = float(value)
        elif want is str:
            if not isinstance(value, str):
                raise ValueError(f"config key {key!r} must be a string")
        kwargs[key] = value

    config = SimConfig(**kwargs)
    config.validate_grid(params if params is not None else default_params())
    return config


def dump_config(config: SimConfig) -> str:
    """Serialize a SimConfig to JSON text; load_config round-trips it."""
    return json.dumps(dataclasses.asdict(config), indent=2) + "\n"
