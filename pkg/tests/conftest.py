import math

import numpy as np
import pytest

from magnon_sense import paper_system


@pytest.fixture(scope="session")
def params():
    """Reference operating point, no squeezing anywhere."""
    return paper_system()


@pytest.fixture(scope="session")
def params_presqueezed():
    """Reference operating point prepared with r0 = 2, theta0 = pi."""
    return paper_system(r0=2.0, theta0=math.pi)


@pytest.fixture(scope="session")
def omega_grid(params):
    return np.linspace(-5.0, 5.0, 1001) * params.kappa_m
