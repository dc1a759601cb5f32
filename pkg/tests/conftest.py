import numpy as np
import pytest

from growthdiff.motion import PhysicsParams


@pytest.fixture
def physics():
    return PhysicsParams(D=1.0, f0=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20250814)
