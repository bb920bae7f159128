import numpy as np
import pytest

from rankone.core import make_module

# every (d, n) pair exercised throughout the suite
SPACES = [(1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (7, 0), (8, 0),
          (1, 2), (2, 1), (2, 2), (4, 1), (4, 2), (8, 1)]

MODULE_SPACES = [(d, n) for d, n in SPACES if n >= 1]


@pytest.fixture(scope="session")
def specs():
    return {(d, n): make_module(d, n) for d, n in SPACES}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
