"""Impurity Green's function of the one-dimensional spin-1/2 Fermi gas.

The main entry points are :func:`greens` (thermodynamic limit, finite coupling
or ``c = inf``), :func:`equal_time` and the finite-system oracles in
:mod:`impgreen.finite`.
"""
from ._accel import BACKEND
from .errors import DomainError, NonConvergenceError
from .greens import DELTA_AT_ORIGIN, GreensValue, equal_time, greens, greens_infinite_c
from .params import PhysicsParams

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DELTA_AT_ORIGIN",
    "DomainError",
    "GreensValue",
    "NonConvergenceError",
    "PhysicsParams",
    "equal_time",
    "greens",
    "greens_infinite_c",
    "__version__",
]
