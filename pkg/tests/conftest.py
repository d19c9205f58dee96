"""Shared fixtures: one standard grid and sourced system per session.

Grids are immutable and identity-compared, so session scope is safe and
keeps the suite fast; anything that needs a different resolution builds its
own grid locally.
"""

from __future__ import annotations

import numpy as np
import pytest

from vanhove import make_grid, make_system, power_law_gaussian, sample
from vanhove.grid import MomentumGrid, RadialFunction, from_values
from vanhove.semiclassics import default_panel


@pytest.fixture(scope="session")
def grid() -> MomentumGrid:
    return make_grid()


@pytest.fixture(scope="session")
def system_g03(grid):
    """Dressed system with the regular source r^{-0.3} e^{-r^2}."""
    return make_system(power_law_gaussian(grid, 0.3))


@pytest.fixture(scope="session")
def f_gauss(grid) -> RadialFunction:
    return sample(grid, lambda r: np.exp(-(r**2)))


@pytest.fixture(scope="session")
def g_gauss(grid) -> RadialFunction:
    return sample(grid, lambda r: np.exp(-2.0 * r**2))


@pytest.fixture(scope="session")
def panel(grid) -> list[RadialFunction]:
    return default_panel(grid)


def random_member(grid: MomentumGrid, rng: np.random.Generator) -> RadialFunction:
    """Random complex combination of four Gaussians; infrared-regular."""
    coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    vals = sum(
        c * np.exp(-s * grid.nodes**2) for c, s in zip(coeffs, (0.5, 1.0, 2.0, 4.0))
    )
    return from_values(grid, vals)
