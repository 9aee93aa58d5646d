"""Faddeeva function w(z) = exp(-z**2) erfc(-i z) and its derivative.

Upper half-plane evaluation is split into three regions:

* ``|z| < 0.5``: Taylor series  sum_n (i z)**n / Gamma(n/2 + 1);
* ``0.5 <= |z| < 8``: Weideman's rational series with 36 terms;
* ``|z| >= 8``: Laplace continued fraction (20 levels), which at
  ``|z| >= 1e4`` is replaced by its three-term asymptotic expansion.

The lower half-plane follows from ``w(z) = 2 exp(-z**2) - w(-z)``.
Relative accuracy is ~1e-14 in the upper half-plane.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit, pick

__all__ = ["wofz", "wofz_deriv", "SQRT_PI"]

SQRT_PI = math.sqrt(math.pi)
_I_SQRT_PI = 1j / SQRT_PI

_R_TAYLOR = 0.5
_R_CF = 8.0
_R_ASYM = 1.0e4
_CF_DEPTH = 20
_N_TAYLOR = 30
_N_WEIDEMAN = 36


def _weideman_coefficients(n_terms: int) -> tuple[float, np.ndarray]:
    m = 2 * n_terms
    k = np.arange(-m + 1, m)
    scale = math.sqrt(n_terms / math.sqrt(2.0))
    t = scale * np.tan(0.5 * k * np.pi / m)
    f = np.concatenate(([0.0], np.exp(-t * t) * (scale * scale + t * t)))
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * m)
    # highest power first, as expected by Horner evaluation
    return scale, np.ascontiguousarray(a[1 : n_terms + 1][::-1])


_W_SCALE, _W_COEF = _weideman_coefficients(_N_WEIDEMAN)


def _taylor_coefficients(n: int) -> np.ndarray:
    c = np.empty(n)
    c[0] = 1.0
    c[1] = 2.0 / SQRT_PI
    for j in range(2, n):
        c[j] = c[j - 2] / (0.5 * j)
    return c


_T_COEF = _taylor_coefficients(_N_TAYLOR)


# ---------------------------------------------------------------- loop kernels


@njit
def _w_upper(z, wcoef, wscale, tcoef):
    """w(z) and the continued-fraction tail r(z) for Im z >= 0.

    ``r`` is only meaningful when |z| >= _R_CF (it is returned as nan otherwise);
    it lets the derivative avoid the cancellation in -2 z w + 2i/sqrt(pi).
    """
    az = abs(z)
    if az < 0.5:
        iz = 1j * z
        s = 0j
        for j in range(tcoef.shape[0] - 1, -1, -1):
            s = s * iz + tcoef[j]
        return s, complex(np.nan, np.nan)
    if az < 8.0:
        den = wscale - 1j * z
        zz = (wscale + 1j * z) / den
        p = 0j
        for j in range(wcoef.shape[0]):
            p = p * zz + wcoef[j]
        return 2.0 * p / (den * den) + (1.0 / math.sqrt(math.pi)) / den, complex(np.nan, np.nan)
    if az >= 1.0e4:
        iz2 = 1.0 / (z * z)
        r = 0.5 / z * (1.0 + iz2 * (1.0 + 2.5 * iz2))
        # r here reproduces the tail to O(z**-7); w from the matching expansion
        w = (1j / math.sqrt(math.pi)) / z * (1.0 + iz2 * (0.5 + 0.75 * iz2))
        return w, r
    r = 0j
    for k in range(20, 1, -1):
        r = (0.5 * k) / (z - r)
    r = 0.5 / (z - r)
    return (1j / math.sqrt(math.pi)) / (z - r), r


@njit
def _w_scalar(z, wcoef, wscale, tcoef):
    if z.imag >= 0.0:
        return _w_upper(z, wcoef, wscale, tcoef)[0]
    return 2.0 * np.exp(-z * z) - _w_upper(-z, wcoef, wscale, tcoef)[0]


@njit
def _dw_upper(z, wcoef, wscale, tcoef):
    w, r = _w_upper(z, wcoef, wscale, tcoef)
    if abs(z) >= 8.0:
        return -(2j / math.sqrt(math.pi)) * r / (z - r)
    return -2.0 * z * w + 2j / math.sqrt(math.pi)


@njit
def _dw_scalar(z, wcoef, wscale, tcoef):
    if z.imag >= 0.0:
        return _dw_upper(z, wcoef, wscale, tcoef)
    return -4.0 * z * np.exp(-z * z) + _dw_upper(-z, wcoef, wscale, tcoef)


@njit
def _wofz_loop(z, wcoef, wscale, tcoef):
    out = np.empty(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        out[i] = _w_scalar(z[i], wcoef, wscale, tcoef)
    return out


@njit
def _dwofz_loop(z, wcoef, wscale, tcoef):
    out = np.empty(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        out[i] = _dw_scalar(z[i], wcoef, wscale, tcoef)
    return out


# --------------------------------------------------------- numpy fallbacks


def _upper_numpy(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised twin of ``_w_upper`` (z must satisfy Im z >= 0)."""
    w = np.empty_like(z)
    r = np.full_like(z, np.nan)
    az = np.abs(z)

    m = az < _R_TAYLOR
    if m.any():
        iz = 1j * z[m]
        s = np.zeros_like(iz)
        for c in _T_COEF[::-1]:
            s = s * iz + c
        w[m] = s

    m = (az >= _R_TAYLOR) & (az < _R_CF)
    if m.any():
        den = _W_SCALE - 1j * z[m]
        zz = (_W_SCALE + 1j * z[m]) / den
        p = np.zeros_like(zz)
        for c in _W_COEF:
            p = p * zz + c
        w[m] = 2.0 * p / (den * den) + (1.0 / SQRT_PI) / den

    m = (az >= _R_CF) & (az < _R_ASYM)
    if m.any():
        zm = z[m]
        rr = np.zeros_like(zm)
        for k in range(_CF_DEPTH, 1, -1):
            rr = (0.5 * k) / (zm - rr)
        rr = 0.5 / (zm - rr)
        w[m] = _I_SQRT_PI / (zm - rr)
        r[m] = rr

    m = az >= _R_ASYM
    if m.any():
        zm = z[m]
        iz2 = 1.0 / (zm * zm)
        r[m] = 0.5 / zm * (1.0 + iz2 * (1.0 + 2.5 * iz2))
        w[m] = _I_SQRT_PI / zm * (1.0 + iz2 * (0.5 + 0.75 * iz2))
    return w, r


def _wofz_numpy(z, wcoef=None, wscale=None, tcoef=None):
    lower = z.imag < 0.0
    zu = np.where(lower, -z, z)
    w, _ = _upper_numpy(zu)
    if lower.any():
        zl = z[lower]
        w[lower] = 2.0 * np.exp(-zl * zl) - w[lower]
    return w


def _dwofz_numpy(z, wcoef=None, wscale=None, tcoef=None):
    lower = z.imag < 0.0
    zu = np.where(lower, -z, z)
    w, r = _upper_numpy(zu)
    far = np.abs(zu) >= _R_CF
    dw = -2.0 * zu * w + 2j / SQRT_PI
    dw[far] = -(2j / SQRT_PI) * r[far] / (zu[far] - r[far])
    if lower.any():
        zl = z[lower]
        dw[lower] = -4.0 * zl * np.exp(-zl * zl) + dw[lower]
    return dw


_wofz_impl = pick(_wofz_loop, _wofz_numpy)
_dwofz_impl = pick(_dwofz_loop, _dwofz_numpy)


def _as_flat(z):
    arr = np.asarray(z, dtype=np.complex128)
    return arr, np.ascontiguousarray(arr.reshape(-1))


def wofz(z):
    """Faddeeva function w(z) for scalar or array ``z``."""
    arr, flat = _as_flat(z)
    if not np.all(np.isfinite(flat)):
        raise ValueError("wofz: non-finite argument")
    out = _wofz_impl(flat, _W_COEF, _W_SCALE, _T_COEF).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def wofz_deriv(z):
    """Derivative w'(z) = -2 z w(z) + 2i/sqrt(pi), evaluated without cancellation."""
    arr, flat = _as_flat(z)
    if not np.all(np.isfinite(flat)):
        raise ValueError("wofz_deriv: non-finite argument")
    out = _dwofz_impl(flat, _W_COEF, _W_SCALE, _T_COEF).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def wofz_backends(z) -> dict[str, np.ndarray]:
    """Evaluate w with both kernels; used by tests and the benchmark."""
    _, flat = _as_flat(z)
    return {
        "numba": _wofz_loop(flat, _W_COEF, _W_SCALE, _T_COEF),
        "numpy": _wofz_numpy(flat),
    }
