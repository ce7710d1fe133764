import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vacua import FrequencyProfile, adiabatic_initial, integrate_mode

settings.register_profile("vacua", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("vacua")


@pytest.fixture(scope="session")
def tanh1():
    return FrequencyProfile.tanh1(1.0, 1.0)


@pytest.fixture(scope="session")
def tanh1_vacuum(tanh1):
    """Out-vacuum of Tanh1 on [-10, 30], seeded adiabatically at the late end."""
    return integrate_mode(tanh1, adiabatic_initial(tanh1, 30.0), (-10.0, 30.0), n_samples=4001)


def plane_wave(w, t):
    u = np.exp(-1j * w * t) / math.sqrt(2.0 * w)
    return u, -1j * w * u
