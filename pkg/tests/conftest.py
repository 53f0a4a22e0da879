import numpy as np
import pytest

from chernoff_heat import Disk, Interval, StarDomain


@pytest.fixture(scope="session")
def unit_interval():
    return Interval(0.0, 1.0)


@pytest.fixture(scope="session")
def unit_disk():
    return Disk((0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def wavy_star():
    # r(theta) = 1 + 0.2 cos(3 theta): smooth, clearly non-circular,
    # curvature stays bounded so the tube estimate is comfortable.
    return StarDomain((0.0, 0.0), [1.0, 0.0, 0.0, 0.2], [0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
