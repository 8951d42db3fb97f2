import numpy as np
import pytest

from rfocus.channel import Environment
from rfocus.envgen import IidEnvSpec, gen_iid


@pytest.fixture
def small_env() -> Environment:
    """Deterministic 8-element environment used across module tests."""
    return gen_iid(IidEnvSpec(n_elements=8, element_sigma=1.0,
                              baseline_magnitude=1.0, seed=7))


@pytest.fixture
def hand_env() -> Environment:
    """Hand-written 2-element environment with known channel values."""
    return Environment(1.0 + 0.0j, np.array([1.0 + 0.0j, 0.0 + 1.0j]))
