import math

import numpy as np
import pytest

from cvpm.algebra import SquareParams, build_pm_square

SQRT_HALF_PI = math.sqrt(math.pi / 2)


@pytest.fixture
def params():
    return SquareParams.canonical()


@pytest.fixture
def square(params):
    return build_pm_square(params)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_amp(rng, radius=2.0):
    return rng.uniform(0, radius) * np.exp(2j * np.pi * rng.uniform())
