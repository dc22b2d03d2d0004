import numpy as np
import pytest

from onofri import build_grid


@pytest.fixture(scope="session")
def grid16():
    return build_grid(16)


@pytest.fixture(scope="session")
def grid48():
    return build_grid(48)


@pytest.fixture(scope="session")
def grid72():
    return build_grid(72)


@pytest.fixture(scope="session")
def grid104():
    return build_grid(104)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
