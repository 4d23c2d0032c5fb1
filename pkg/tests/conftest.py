import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import circlelab as cl
from circlelab.config import mode_field

settings.register_profile(
    "lab", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")


@pytest.fixture(scope="session")
def grid64():
    return cl.CircleGrid(64)


@pytest.fixture(scope="session")
def appendix_sig():
    return cl.appendix_series()


@pytest.fixture(scope="session")
def appendix_nl():
    return cl.appendix_nonlinearity()


@pytest.fixture(scope="session")
def sin_field(grid64):
    return mode_field(grid64, {}, {1: 1.0})


@pytest.fixture(scope="session")
def zero_field(grid64):
    return mode_field(grid64, {}, {})


def random_trig(grid, seed, n_modes=6, sup=1.0):
    from circlelab.config import random_field
    return random_field(grid, seed, n_modes, sup)


# Frozen oracle values (computed with mpmath dps=40 before the build).
F0_AT_1 = -2.3275765617212088          # value of the dyadic series at t = 1
DYADIC_INTEGRAL_CONSTANT = -3.3946498021251656   # integral at t = 2^n, n >= 1
PHI_AT_DYADIC = 0.033552302059863086
PHI_LOWER_BOUND = 0.00025273089102385439         # e^(-2 pi - 2)
# Fine-grid minima of the integral over dyadic windows [2^m, 2^{m+1}].
WINDOW_MIN_F = {
    1: -3.69349, 2: -5.56292, 3: -6.81689, 4: -8.42210, 5: -9.86551,
    6: -11.39276, 7: -12.87888, 8: -14.38576, 9: -15.88230, 10: -17.38403,
}
