import math

import numpy as np
import pytest

from mqlefschetz.geometry import ModelGeometry

TWO_PI = 2.0 * math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


@pytest.fixture
def circle():
    return ModelGeometry.circle()


@pytest.fixture
def torus():
    return ModelGeometry.flat_torus([TWO_PI, TWO_PI])


@pytest.fixture
def sphere():
    return ModelGeometry.sphere()


@pytest.fixture
def hyperbolic():
    return ModelGeometry.hyperbolic_patch()
