import numpy as np
import pytest

from framewalk import ElasticCoefficients, SpectralGrid, reduce_coefficients
from framewalk.frames import random_frame


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def grid8():
    return SpectralGrid((8, 8, 8), (2 * np.pi,) * 3)


@pytest.fixture
def grid16():
    return SpectralGrid((16, 16, 16), (2 * np.pi,) * 3)


@pytest.fixture
def box_grid():
    """The property-test box: [-1, 1]^3, homogeneous along x3."""
    return SpectralGrid((24, 24, 1), (2.0, 2.0, 2.0), (-1.0, -1.0, -1.0))


def random_reduced(rng, low=0.0, high=5.0):
    K = tuple(rng.uniform(low, high, size=12))
    return reduce_coefficients(ElasticCoefficients(K))


@pytest.fixture
def smooth_frame(grid16, rng):
    return random_frame(grid16, rng, max_mode=2, amplitude=0.4)
