import numpy as np
import pytest

from lgdiscord import GridSpec, bell_modes, intensity


@pytest.fixture(scope="session")
def default_grid():
    return GridSpec()  # n=512, half_extent=4, waist=1


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(n=128)


@pytest.fixture(scope="session")
def tiny_grid():
    return GridSpec(n=32)


@pytest.fixture(scope="session")
def default_pair(default_grid):
    return bell_modes(default_grid)


@pytest.fixture(scope="session")
def small_pair(small_grid):
    return bell_modes(small_grid)


@pytest.fixture(scope="session")
def small_basis_maps(small_pair):
    psi, phi = small_pair
    return intensity(psi), intensity(phi)


@pytest.fixture(scope="session")
def tiny_basis_maps(tiny_grid):
    psi, phi = bell_modes(tiny_grid)
    return intensity(psi), intensity(phi)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
