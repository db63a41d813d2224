import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qcoupon.model import ChannelParams

settings.register_profile(
    "ci",
    max_examples=100,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def fig1b_params() -> ChannelParams:
    """Operating point used throughout the simulation-figure checks."""
    return ChannelParams(eta=0.68, dark_rate=1e-8, visibility=0.99998)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([1234])))
