import numpy as np
import pytest

from angiosim.fractions import VolumeFractions
from angiosim.grid import Grid, ScalarField
from angiosim.params import default_params


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def grid10():
    """Default production grid: h=10 on the R=500 disk (101x101)."""
    return Grid(10.0)


def uniform_fractions(grid, fB=0.2, fF=0.3):
    """Spatially constant fraction triple on the active nodes."""
    b = np.where(grid.mask, fB, 0.0)
    f = np.where(grid.mask, fF, 0.0)
    e = np.where(grid.mask, 1.0 - (b + f), 0.0)
    return VolumeFractions(ScalarField(grid, b), ScalarField(grid, f),
                           ScalarField(grid, e))


def constant_field(grid, value):
    return ScalarField(grid, np.where(grid.mask, value, 0.0))
