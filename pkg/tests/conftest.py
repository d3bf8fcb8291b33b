# tests/conftest.py
# Fixtures compartilhadas: 𝒢_3, seu θ (resolvido uma vez) e o cenário de aleatoriedade

import numpy as np
import pytest

from graphs import build_gd
from randomness import gd_scenario
from theta import lovasz_theta


@pytest.fixture(scope="session")
def g3():
    return build_gd(3)


@pytest.fixture(scope="session")
def theta_g3(g3):
    return lovasz_theta(g3)


@pytest.fixture(scope="session")
def scenario3():
    return gd_scenario(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


