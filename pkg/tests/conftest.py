"""Test configuration and fixtures for deepnets tests."""

import numpy as np
import pytest

from deepnets.activation import sigmoid
from deepnets.config import ExperimentConfig
from deepnets.partition import make_partition


@pytest.fixture(scope="session")
def logistic():
    """The logistic sigmoid."""
    return sigmoid("logistic")


@pytest.fixture(scope="session", params=["logistic", "tanh", "arctan", "gompertz"])
def any_sigmoid(request):
    """Each of the four sigmoid kinds."""
    return sigmoid(request.param)


@pytest.fixture(scope="session")
def grid_4x4():
    """The 4 x 4 partition of the unit square."""
    return make_partition(4, 2)


@pytest.fixture(scope="function")
def rng():
    """A freshly seeded generator."""
    return np.random.default_rng(20240601)


@pytest.fixture(scope="function")
def small_sweep_config(tmp_path):
    """A sweep small enough for unit tests."""
    return ExperimentConfig(
        task="sweep",
        d=1,
        r=1.0,
        c0=1.0,
        tau=0.1,
        m_grid=[64, 128, 256],
        trials=2,
        seed=7,
        mc_points=512,
        output=str(tmp_path / "sweep.csv"),
    )
