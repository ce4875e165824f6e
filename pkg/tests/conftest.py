import pytest

from mestrisk import GridConfig


@pytest.fixture(scope="session")
def fast_grid():
    """Coarse lattice for module tests; converged to ~1e-6 (see exact tests)."""
    return GridConfig(grid_size=1024, u_points=128)


@pytest.fixture(scope="session")
def medium_grid():
    return GridConfig(grid_size=2048, u_points=256)
