import math

import pytest

from impgreen.params import PhysicsParams


@pytest.fixture
def box():
    """Desk-scale finite system: L = 10, c = 2, N = 3."""
    return PhysicsParams.finite(2.0, 10.0, 3)


@pytest.fixture
def thermo():
    """Default thermodynamic parameters c = 2, k_F = 1."""
    return PhysicsParams.thermodynamic(2.0, 1.0)


def finite_at_kf(N, c=2.0, k_F=1.0):
    return PhysicsParams.finite(c, math.pi * N / k_F, N)
