"""Nystrom discretisation of integral operators on [-k_F, k_F] and their determinants.

A kernel K(q, q') is sampled on Gauss-Legendre nodes with the symmetric weighting
sqrt(w_a) K(q_a, q_b) sqrt(w_b), which is similar to the plain w_b weighting and
so has the same determinant. Kernels are callables taking broadcastable node
arrays ``(q[:, None], q[None, :])``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonConvergenceError
from .linalg import SingularMatrixError, det, lu_det, lu_factor, lu_solve

__all__ = [
    "NystromSystem",
    "gauss_legendre",
    "nystrom_det",
    "lemma_terms",
    "det_pair_from_matrix",
    "det_pair",
    "converge_det",
    "ORDER_START",
    "ORDER_CAP",
]

ORDER_START = 16
ORDER_CAP = 1024


@lru_cache(maxsize=32)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(k_F: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-k_F, k_F]."""
    if order < 2:
        raise DomainError(f"order must be >= 2, got {order}")
    x, w = _leggauss(int(order))
    return k_F * x, k_F * w


@dataclass(frozen=True)
class NystromSystem:
    nodes: np.ndarray
    weights: np.ndarray
    M: np.ndarray

    @classmethod
    def build(cls, kernel, k_F: float, order: int, symmetric: bool = True) -> "NystromSystem":
        q, w = gauss_legendre(k_F, order)
        K = np.asarray(kernel(q[:, None], q[None, :]), dtype=np.complex128)
        if K.shape != (order, order):
            raise DomainError(f"kernel returned shape {K.shape}, expected {(order, order)}")
        bad = np.argwhere(~np.isfinite(K))
        if bad.size:
            i, j = bad[0]
            raise DomainError(f"non-finite kernel sample at (q={q[i]:.6g}, q'={q[j]:.6g})")
        if symmetric:
            sw = np.sqrt(w)
            M = sw[:, None] * K * sw[None, :]
        else:
            M = K * w[None, :]
        return cls(q, w, M)

    @property
    def order(self) -> int:
        return self.nodes.size

    def det(self) -> complex:
        return det(np.eye(self.order) + self.M)


def nystrom_det(kernel, k_F: float, order: int) -> complex:
    """det(1 + K) on [-k_F, k_F] at a fixed Gauss-Legendre order."""
    return NystromSystem.build(kernel, k_F, order).det()


def lemma_terms(M: np.ndarray, r: np.ndarray) -> tuple[complex, complex]:
    """(det(I + M), rho) with rho = r^T (I + M)^{-1} r / (2 pi), one factorisation.

    det(I + M - r r^T / 2pi) = det(I + M) (1 - rho).
    """
    n = M.shape[0]
    factors = lu_factor(np.eye(n) + M)
    d = lu_det(factors[0], factors[2])
    y = lu_solve(factors, r)
    return d, complex(np.dot(r, y) / (2.0 * math.pi))


def det_pair_from_matrix(M: np.ndarray, r: np.ndarray, full_matrix: bool = False) -> tuple[complex, complex]:
    """(det(I + M), det(I + M - r r^T / 2pi)) for an already weighted system."""
    n = M.shape[0]
    if not full_matrix:
        try:
            d, rho = lemma_terms(M, r)
            return d, d * (1.0 - rho)
        except SingularMatrixError:
            warnings.warn("I + M is singular; falling back to two full determinants", RuntimeWarning, stacklevel=2)
    A = np.eye(n) + M
    return det(A), det(A - np.outer(r, r) / (2.0 * math.pi))


def det_pair(V_kernel, R_factor, k_F: float, order: int, full_matrix: bool = False) -> tuple[complex, complex]:
    """(det(1 + V), det(1 + V - R)) with R(q, q') = f(q) f(q') / 2pi.

    The second determinant reuses the LU factors of the first via the
    determinant lemma unless ``full_matrix`` asks for the direct oracle.
    """
    system = NystromSystem.build(V_kernel, k_F, order)
    r = np.sqrt(system.weights) * np.asarray(R_factor(system.nodes), dtype=np.complex128)
    return det_pair_from_matrix(system.M, r, full_matrix=full_matrix)


def converge_det(kernel, k_F: float, tol: float, start: int = ORDER_START, cap: int = ORDER_CAP):
    """Double the order until successive determinants differ by less than ``tol``.

    Returns ``(value, order, history)`` with history a list of (order, value).
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    order = start
    history = [(order, nystrom_det(kernel, k_F, order))]
    while order < cap:
        order *= 2
        history.append((order, nystrom_det(kernel, k_F, order)))
        if abs(history[-1][1] - history[-2][1]) < tol:
            return history[-1][1], order, history
    raise NonConvergenceError(f"determinant not converged to {tol} by order {cap}", history)
