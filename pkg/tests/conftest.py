import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conekit.fields import PeriodicGrid


@pytest.fixture
def grid16():
    return PeriodicGrid(16)


@pytest.fixture
def grid32():
    return PeriodicGrid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)
