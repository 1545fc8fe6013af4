"""Shared fixtures: labeled grids, the tri-stable model and seeded generators."""

import numpy as np
import pytest

from bibkit.core.models import GridSpec, IBConfig
from bibkit.dynamics import PolynomialMap, extract_boundary, label_grid
from bibkit.inference import tri_stable_model


@pytest.fixture(scope="session")
def cubic():
    return PolynomialMap.cubic_unity()


@pytest.fixture(scope="session")
def quadratic():
    """``z**2 - 1``: two basins split by the imaginary axis."""
    return PolynomialMap((-1.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def small_grid(cubic):
    return label_grid(cubic, GridSpec(nx=128, ny=128))


@pytest.fixture(scope="session")
def grid_512(cubic):
    return label_grid(cubic, GridSpec(nx=512, ny=512), workers=4)


@pytest.fixture(scope="session")
def half_plane_grid(quadratic):
    return label_grid(quadratic, GridSpec(nx=64, ny=32))


@pytest.fixture(scope="session")
def small_mask(small_grid):
    return extract_boundary(small_grid)


@pytest.fixture
def tri_stable():
    return tri_stable_model()


@pytest.fixture
def ib_config():
    return IBConfig(gamma=0.01, theta=0.36, window=16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
