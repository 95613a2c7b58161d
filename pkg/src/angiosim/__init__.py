"""angiosim: seeded hybrid SDE / ODE / reaction-diffusion angiogenesis simulator."""

__version__ = "0.1.0"

from .params import ModelParams, SimConfig, default_params, dump_config, load_config  # noqa: F401,E402
from .grid import Grid, ScalarField, gradient_at, integrate, interpolate_at  # noqa: F401,E402
from .sources import MollifierPotential, RateFields, assemble_rates, bump_normalizer, eval_potential  # noqa: F401,E402
from .fractions import VolumeFractions, init_fractions, step_fractions  # noqa: F401,E402
from .proteins import (Concentrations, PentaSystem, SolverError,  # noqa: F401,E402
                       assemble_system, mix_diffusivity, solve_system,
                       step_concentrations)
from .cells import (CellPopulation, DriftContext, StepNoise, drift,  # noqa: F401,E402
                    em_step, sigma_profile, strain_energy)
from .engine import RunSummary, SimState, advance, init_state, run  # noqa: F401,E402
