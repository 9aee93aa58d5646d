"""Dense complex LU factorisation with partial pivoting.

Only what the Fredholm engine needs: determinant, one linear solve against the
same factors, and a determinant-lemma helper for rank-one updates.
"""
from __future__ import annotations

import numpy as np

from ._accel import njit, pick

__all__ = ["lu_factor", "lu_solve", "lu_det", "det", "det_rank_one_update", "SingularMatrixError"]


class SingularMatrixError(ArithmeticError):
    pass


@njit
def _lu_loop(a):
    n = a.shape[0]
    lu = a.copy()
    piv = np.arange(n)
    sign = 1.0
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            v = abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if p != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
            tmp_i = piv[k]
            piv[k] = piv[p]
            piv[p] = tmp_i
            sign = -sign
        pivot = lu[k, k]
        if pivot == 0:
            continue
        for i in range(k + 1, n):
            f = lu[i, k] / pivot
            lu[i, k] = f
            if f != 0:
                for j in range(k + 1, n):
                    lu[i, j] -= f * lu[k, j]
    return lu, piv, sign


def _lu_numpy(a):
    n = a.shape[0]
    lu = a.copy()
    piv = np.arange(n)
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            piv[[k, p]] = piv[[p, k]]
            sign = -sign
        pivot = lu[k, k]
        if pivot == 0:
            continue
        lu[k + 1 :, k] /= pivot
        lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, piv, sign


@njit
def _solve_loop(lu, piv, b):
    n = lu.shape[0]
    y = np.empty(n, dtype=np.complex128)
    for i in range(n):
        y[i] = b[piv[i]]
    for i in range(n):
        s = y[i]
        for j in range(i):
            s -= lu[i, j] * y[j]
        y[i] = s
    for i in range(n - 1, -1, -1):
        s = y[i]
        for j in range(i + 1, n):
            s -= lu[i, j] * y[j]
        y[i] = s / lu[i, i]
    return y


def _solve_numpy(lu, piv, b):
    n = lu.shape[0]
    y = b[piv].astype(np.complex128)
    for i in range(1, n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1 :] @ y[i + 1 :]) / lu[i, i]
    return y


_lu_impl = pick(_lu_loop, _lu_numpy)
_solve_impl = pick(_solve_loop, _solve_numpy)


def lu_factor(a: np.ndarray):
    """Return ``(lu, piv, sign)`` with ``a[piv] = L @ U`` (unit lower L packed below the diagonal)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    return _lu_impl(a)


def lu_det(lu: np.ndarray, sign: float) -> complex:
    return complex(np.prod(np.diagonal(lu)) * sign)


def lu_solve(factors, b: np.ndarray) -> np.ndarray:
    lu, piv, _ = factors
    if np.any(np.diagonal(lu) == 0):
        raise SingularMatrixError("matrix is exactly singular")
    return _solve_impl(lu, piv, np.ascontiguousarray(b, dtype=np.complex128))


def det(a: np.ndarray) -> complex:
    lu, _, sign = lu_factor(a)
    return lu_det(lu, sign)


def det_rank_one_update(a: np.ndarray, u: np.ndarray, v: np.ndarray, *, factors=None):
    """Return ``(det(a), det(a + outer(u, v)))`` from a single factorisation.

    Uses det(A + u v^T) = det(A) (1 + v^T A^{-1} u); note the plain transpose,
    not the conjugate one.
    """
    if factors is None:
        factors = lu_factor(a)
    d = lu_det(factors[0], factors[2])
    y = lu_solve(factors, u)
    return d, d * (1.0 + np.dot(v, y))


def backends():
    """Both LU kernels, for tests and benchmarks."""
    return {"numba": (_lu_loop, _solve_loop), "numpy": (_lu_numpy, _solve_numpy)}
