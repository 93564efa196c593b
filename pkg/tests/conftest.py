import pytest

from stochsirs import NoiseIntensities, baseline_params


@pytest.fixture
def low():
    """R0 < 1 regime."""
    return baseline_params(mu=0.05)


@pytest.fixture
def high():
    """R0 > 1 regime."""
    return baseline_params(mu=0.006)


@pytest.fixture
def mixed_noise():
    return NoiseIntensities(0.01, 0.02, 0.03, 0.01)
