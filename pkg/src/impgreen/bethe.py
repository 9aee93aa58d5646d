"""Bethe equations of the one-impurity sector as functions of the rapidity lambda.

For an integer label ``n`` the scaled momentum ``z_n(lambda) = L k / 2`` solves

    z = pi n + arccot(a z - 2 lambda / c),      a = 4 / (L c),

with ``arccot`` valued in [0, pi]. We store the fractional part
``y = z - pi n`` in (0, pi), which keeps full precision for large ``|n|``.
The quantised rapidities are the roots of ``sum_j alpha_j(lambda) = -pi m``;
``m = 0`` is the state at ``lambda = -inf``, carried as ``MINUS_INFINITY``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._accel import njit, pick
from .errors import DomainError, InvalidStateError, PoleError, SolverError
from .params import PhysicsParams

__all__ = [
    "MINUS_INFINITY",
    "arccot",
    "is_minus_infinity",
    "solve_z",
    "solve_z_array",
    "dz_dlambda",
    "momenta_of_lambda",
    "alpha_of",
    "u_of",
    "sum_alpha",
    "total_momentum",
    "find_lambda_roots",
    "find_lambda_roots_batch",
    "ImpurityState",
    "impurity_states",
    "appendix_sums",
    "appendix_sums_truncated",
    "window_tail_sums",
    "entire_f",
    "log_derivative_g",
]

MINUS_INFINITY = -math.inf

_BISECT_WIDTH = 1e-3
_NEWTON_TOL = 1e-13


def arccot(x):
    """Inverse cotangent with range [0, pi]; arccot(+inf) = 0, arccot(-inf) = pi."""
    return 0.5 * np.pi - np.arctan(x)


def is_minus_infinity(lam) -> bool:
    return isinstance(lam, float) and lam == MINUS_INFINITY


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite input {v!r}")


# ------------------------------------------------------------------ kernels


@njit
def _solve_frac_scalar(s, a):
    """Solve y = arccot(s + a y) on (0, pi): bisection to 1e-3, then Newton."""
    half_pi = 0.5 * math.pi
    lo = 0.0
    hi = math.pi
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if mid - (half_pi - math.atan(s + a * mid)) > 0.0:
            hi = mid
        else:
            lo = mid
    y = 0.5 * (lo + hi)
    for _ in range(60):
        w = s + a * y
        step = (y - (half_pi - math.atan(w))) / (1.0 + a / (1.0 + w * w))
        y -= step
        if abs(step) < 1e-13:
            break
    # one extra step lands on the rounding floor
    w = s + a * y
    return y - (y - (half_pi - math.atan(w))) / (1.0 + a / (1.0 + w * w))


@njit
def _solve_frac_loop(shift, a):
    out = np.empty(shift.shape[0])
    for i in range(shift.shape[0]):
        out[i] = _solve_frac_scalar(shift[i], a)
    return out


def _solve_frac_numpy(shift, a):
    lo = np.zeros_like(shift)
    hi = np.full_like(shift, np.pi)
    # pi / 2**12 < 1e-3
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        pos = mid - arccot(shift + a * mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    y = 0.5 * (lo + hi)
    for _ in range(60):
        w = shift + a * y
        step = (y - arccot(w)) / (1.0 + a / (1.0 + w * w))
        y = y - step
        if np.max(np.abs(step), initial=0.0) < _NEWTON_TOL:
            break
    w = shift + a * y
    return y - (y - arccot(w)) / (1.0 + a / (1.0 + w * w))


_solve_frac = pick(_solve_frac_loop, _solve_frac_numpy)


def _frac_parts(nu, lam: float, a: float, c: float) -> np.ndarray:
    """Fractional parts y(nu) = z_nu - pi nu for real (possibly half-integer) labels."""
    nu = np.ascontiguousarray(nu, dtype=np.float64)
    if is_minus_infinity(lam):
        return np.zeros_like(nu)
    shift = a * np.pi * nu - 2.0 * lam / c
    return _solve_frac(shift, a)


# --------------------------------------------------------------- operations


def solve_z_array(n, lam: float, params: PhysicsParams) -> np.ndarray:
    """Vectorised ``z_n(lambda)`` over an array of labels."""
    if not is_minus_infinity(lam):
        _check_finite(lam)
    n = np.asarray(n, dtype=np.float64)
    _check_finite(n)
    return np.pi * n + _frac_parts(n.ravel(), lam, params.a, params.c).reshape(n.shape)


def solve_z(n: int, lam: float, params: PhysicsParams) -> float:
    """The unique root ``z_n(lambda)`` in (pi n, pi n + pi); monotone increasing in lambda."""
    return float(solve_z_array(np.array([n]), lam, params)[0])


def dz_dlambda(n: int, lam: float, params: PhysicsParams) -> float:
    a, c = params.a, params.c
    if is_minus_infinity(lam):
        return 0.0
    z = solve_z(n, lam, params)
    w = a * z - 2.0 * lam / c
    return (2.0 / c) / (1.0 + a + w * w)


def _check_labels(n_labels) -> np.ndarray:
    labels = np.asarray(n_labels)
    if labels.ndim != 1 or labels.size == 0:
        raise InvalidStateError("labels must be a non-empty 1-d sequence")
    if not np.all(labels == np.round(labels)):
        raise InvalidStateError(f"labels must be integers, got {n_labels!r}")
    labels = labels.astype(np.int64)
    if np.unique(labels).size != labels.size:
        raise InvalidStateError(f"labels must be distinct, got {list(labels)}")
    return labels


def momenta_of_lambda(n_labels, lam: float, params: PhysicsParams) -> np.ndarray:
    """k_j(lambda) = (2/L) z_{n_j}(lambda); each depends on its own label only."""
    labels = _check_labels(n_labels)
    return (2.0 / params.L) * solve_z_array(labels, lam, params)


def alpha_of(k, lam: float, c: float):
    """alpha(k, lambda) = -arccot(2 (k - lambda) / c), in (-pi, 0); zero at lambda = -inf."""
    k = np.asarray(k, dtype=np.float64)
    if is_minus_infinity(lam):
        return np.zeros_like(k)
    return -arccot(2.0 * (k - lam) / c)


def u_of(k, lam: float, params: PhysicsParams):
    """u(k, lambda) = 1 + a + (2 (k - lambda) / c)**2; +inf at lambda = -inf."""
    k = np.asarray(k, dtype=np.float64)
    if is_minus_infinity(lam):
        return np.full_like(k, np.inf)
    w = 2.0 * (k - lam) / params.c
    return 1.0 + params.a + w * w


def sum_alpha(labels: np.ndarray, lam: float, params: PhysicsParams) -> float:
    if is_minus_infinity(lam):
        return 0.0
    return -float(np.sum(_frac_parts(labels, lam, params.a, params.c)))


def total_momentum(n_labels, lam: float, params: PhysicsParams) -> float:
    """P(lambda) = sum_j k_j(lambda), computed as (2/L)(pi sum n_j - sum alpha_j)."""
    labels = _check_labels(n_labels)
    return (2.0 / params.L) * (np.pi * float(labels.sum()) - sum_alpha(labels, lam, params))


def find_lambda_roots(n_labels, params: PhysicsParams) -> list[tuple[int, float]]:
    """All N+1 rapidities ``(m, Lambda_m)``; m = 0 carries ``MINUS_INFINITY``.

    For m >= 1 the root of the strictly decreasing ``sum_alpha + pi m`` is bracketed
    starting from [min k - 10c, max k + 10c] and widened geometrically.
    """
    labels = _check_labels(n_labels)
    if params.N is not None and labels.size != params.N + 1:
        raise InvalidStateError(f"need N+1 = {params.N + 1} labels, got {labels.size}")
    c = params.c
    k_free = 2.0 * np.pi * labels / params.L
    lo0 = float(k_free.min() - 10.0 * c)
    hi0 = float(k_free.max() + 10.0 * c)
    roots: list[tuple[int, float]] = [(0, MINUS_INFINITY)]
    for m in range(1, labels.size):

        def h(lam, m=m):
            return sum_alpha(labels, lam, params) + np.pi * m

        lo, hi = lo0, hi0
        width = hi - lo
        for _ in range(200):
            if h(lo) > 0.0:
                break
            width *= 2.0
            lo -= width
        for _ in range(200):
            if h(hi) < 0.0:
                break
            width *= 2.0
            hi += width
        hlo, hhi = h(lo), h(hi)
        if not (hlo > 0.0 > hhi):
            raise SolverError(
                f"could not bracket root m={m} for labels {list(labels)}: "
                f"scanned [{lo:.6g}, {hi:.6g}], h = ({hlo:.3g}, {hhi:.3g})"
            )
        root = brentq(h, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        roots.append((m, float(root)))
    return roots


@njit
def _sum_alpha_and_slope(labels, lam, a, c):
    """(sum_j alpha_j(lambda), d/dlambda of it) for one label set."""
    total = 0.0
    slope = 0.0
    for j in range(labels.shape[0]):
        y = _solve_frac_scalar(a * math.pi * labels[j] - 2.0 * lam / c, a)
        w = a * (math.pi * labels[j] + y) - 2.0 * lam / c
        total -= y
        slope -= (2.0 / c) / (1.0 + a + w * w)
    return total, slope


@njit
def _roots_batch_loop(labels2d, a, c, L):
    n_sets, n1 = labels2d.shape
    out = np.empty((n_sets, n1 - 1))
    for s in range(n_sets):
        lab = labels2d[s]
        kmin = 2.0 * math.pi * lab.min() / L
        kmax = 2.0 * math.pi * lab.max() / L
        for m in range(1, n1):
            target = -math.pi * m
            lo = kmin - 10.0 * c
            hi = kmax + 10.0 * c
            width = hi - lo
            while _sum_alpha_and_slope(lab, lo, a, c)[0] <= target:
                width *= 2.0
                lo -= width
            while _sum_alpha_and_slope(lab, hi, a, c)[0] >= target:
                width *= 2.0
                hi += width
            lam = 0.5 * (lo + hi)
            for _ in range(400):
                h, dh = _sum_alpha_and_slope(lab, lam, a, c)
                h -= target
                if h > 0.0:
                    lo = lam
                else:
                    hi = lam
                new = lam - h / dh
                if not (lo < new < hi):
                    new = 0.5 * (lo + hi)
                if abs(new - lam) <= 1e-15 * max(1.0, abs(lam)) or hi - lo <= 1e-15 * max(1.0, abs(lam)):
                    lam = new
                    break
                lam = new
            out[s, m - 1] = lam
    return out


def _roots_batch_numpy(labels2d, a, c, L):
    n_sets, n1 = labels2d.shape
    labels2d = labels2d.astype(np.float64)

    def h_and_slope(lam):
        shift = a * np.pi * labels2d - (2.0 * lam / c)[:, None]
        y = _solve_frac_numpy(shift.ravel(), a).reshape(shift.shape)
        w = shift + a * y
        return -y.sum(axis=1), -((2.0 / c) / (1.0 + a + w * w)).sum(axis=1)

    out = np.empty((n_sets, n1 - 1))
    kmin = 2.0 * np.pi * labels2d.min(axis=1) / L
    kmax = 2.0 * np.pi * labels2d.max(axis=1) / L
    for m in range(1, n1):
        target = -np.pi * m
        lo = kmin - 10.0 * c
        hi = kmax + 10.0 * c
        width = hi - lo
        while True:
            bad = h_and_slope(lo)[0] <= target
            if not bad.any():
                break
            width = np.where(bad, 2.0 * width, width)
            lo = np.where(bad, lo - width, lo)
        while True:
            bad = h_and_slope(hi)[0] >= target
            if not bad.any():
                break
            width = np.where(bad, 2.0 * width, width)
            hi = np.where(bad, hi + width, hi)
        lam = 0.5 * (lo + hi)
        for _ in range(400):
            h, dh = h_and_slope(lam)
            h = h - target
            lo = np.where(h > 0.0, lam, lo)
            hi = np.where(h > 0.0, hi, lam)
            new = lam - h / dh
            new = np.where((new > lo) & (new < hi), new, 0.5 * (lo + hi))
            done = np.abs(new - lam) <= 1e-15 * np.maximum(1.0, np.abs(lam))
            lam = new
            if done.all():
                break
        out[:, m - 1] = lam
    return out


_roots_batch = pick(_roots_batch_loop, _roots_batch_numpy)


def find_lambda_roots_batch(labels2d, params: PhysicsParams) -> np.ndarray:
    """Finite rapidities Lambda_1..Lambda_N for many label sets at once, shape (sets, N).

    Safeguarded Newton on the bracketed, strictly decreasing sum of phases; the
    scalar :func:`find_lambda_roots` (brentq) is the reference it is tested against.
    """
    labels2d = np.ascontiguousarray(labels2d, dtype=np.int64)
    if labels2d.ndim != 2:
        raise InvalidStateError("expected a 2-d array of label sets")
    if labels2d.shape[1] < 2:
        return np.empty((labels2d.shape[0], 0))
    return _roots_batch(labels2d, params.a, params.c, params.L)


@dataclass(frozen=True)
class ImpurityState:
    """One eigenstate of the sector with N up-spins plus the impurity."""

    n_labels: tuple[int, ...]
    m: int
    lam: float
    k: np.ndarray
    alpha: np.ndarray
    u: np.ndarray
    frac: np.ndarray
    params: PhysicsParams

    @classmethod
    def from_root(cls, n_labels, m: int, lam: float, params: PhysicsParams) -> "ImpurityState":
        labels = _check_labels(n_labels)
        frac = _frac_parts(labels, lam, params.a, params.c)
        k = (2.0 / params.L) * (np.pi * labels + frac)
        return cls(
            n_labels=tuple(int(v) for v in labels),
            m=int(m),
            lam=lam,
            k=k,
            alpha=-frac,
            u=u_of(k, lam, params),
            frac=frac,
            params=params,
        )

    @property
    def at_minus_infinity(self) -> bool:
        return is_minus_infinity(self.lam)

    @property
    def inv_u(self) -> np.ndarray:
        if self.at_minus_infinity:
            return np.zeros_like(self.k)
        return 1.0 / self.u

    def bethe_residual(self) -> float:
        """max_j |cot(k_j L/2) - 2(k_j - lambda)/c|, using cot(pi n + y) = cot(y)."""
        if self.at_minus_infinity:
            return float(np.max(np.abs(self.frac)))
        a, c = self.params.a, self.params.c
        w = a * (np.pi * np.asarray(self.n_labels) + self.frac) - 2.0 * self.lam / c
        return float(np.max(np.abs(1.0 / np.tan(self.frac) - w)))


def impurity_states(n_labels, params: PhysicsParams) -> list[ImpurityState]:
    """The N+1 states sharing one label set, ordered by m."""
    return [ImpurityState.from_root(n_labels, m, lam, params) for m, lam in find_lambda_roots(n_labels, params)]


# ---------------------------------------------------------- summation formulas


def _z_free(q: float, params: PhysicsParams) -> float:
    z0 = params.L * q / 2.0
    if abs(z0 / np.pi - round(z0 / np.pi)) > 1e-9:
        raise DomainError(f"q={q} is not on the free lattice 2 pi m / L")
    return z0


def appendix_sums(q: float, lam: float, params: PhysicsParams) -> tuple[float, float]:
    """Closed forms of (2/L) sum_k 1/(k - q) and (4/L^2) sum_k 1/(k - q)^2."""
    _z_free(q, params)
    _check_finite(lam)
    d = q - lam
    c = params.c
    return 2.0 * d / c, 1.0 + 2.0 * params.a + 4.0 * d * d / (c * c)


def _tail_integrals(z0, zp, zm, a, beta):
    """Continuum parts of the symmetric-window tails of sum 1/(z_n - z0)^p, p = 1, 2.

    Integrates dnu = (1 + a/(1 + w^2)) dz / pi over z > zp and z < zm, w = a z - beta.
    """
    w0 = a * z0 - beta
    wp = a * zp - beta
    wm = a * zm - beta
    s0 = 1.0 + w0 * w0

    def phi1(w):
        return math.log(abs(w - w0)) - 0.5 * math.log1p(w * w) - w0 * math.atan(w)

    half_pi = 0.5 * math.pi
    lorentz1 = ((-w0 * half_pi - phi1(wp)) + (phi1(wm) - w0 * half_pi)) / s0
    # the two logarithmic divergences cancel between the tails
    t1 = (math.log((z0 - zm) / (zp - z0)) + a * lorentz1) / math.pi

    A = -2.0 * w0 / (s0 * s0)
    B = 1.0 / s0
    D = (w0 * w0 - 1.0) / (s0 * s0)

    def psi(w):
        return A * (math.log(abs(w - w0)) - 0.5 * math.log1p(w * w)) - B / (w - w0) + D * math.atan(w)

    lorentz2 = (D * half_pi - psi(wp)) + (psi(wm) + D * half_pi)
    t2 = (1.0 / (zp - z0) + 1.0 / (z0 - zm) + a * a * lorentz2) / math.pi
    return t1, t2


def window_tail_sums(z0: float, lam: float, params: PhysicsParams, cutoff: int) -> tuple[float, float]:
    """Estimates of sum_{|n| > cutoff} (z_n - z0)**-p for p = 1, 2 (symmetric window).

    ``z0`` may be any real point strictly inside the window. The estimate is the
    midpoint Euler-Maclaurin rule: continuum integrals beyond n = +-(cutoff + 1/2)
    plus the first-derivative correction, so the remaining error is O(cutoff**-3).
    """
    a, c = params.a, params.c
    beta = 2.0 * lam / c
    yp, ym = _frac_parts(np.array([cutoff + 0.5, -cutoff - 0.5]), lam, a, c)
    zp = np.pi * (cutoff + 0.5) + yp
    zm = -np.pi * (cutoff + 0.5) + ym
    if not zm < z0 < zp:
        raise DomainError(f"z0={z0} lies outside the summation window")
    t1, t2 = _tail_integrals(z0, zp, zm, a, beta)

    def dz_dnu(z):
        w = a * z - beta
        return np.pi / (1.0 + a / (1.0 + w * w))

    t1 += (-(1.0 / (zp - z0) ** 2) * dz_dnu(zp) + (1.0 / (zm - z0) ** 2) * dz_dnu(zm)) / 24.0
    t2 += (-(2.0 / (zp - z0) ** 3) * dz_dnu(zp) + (2.0 / (zm - z0) ** 3) * dz_dnu(zm)) / 24.0
    return float(t1), float(t2)


def appendix_sums_truncated(q: float, lam: float, params: PhysicsParams, cutoff: int, tail: bool = True):
    """Direct sums over |n| <= cutoff, optionally with the analytic tail.

    The tail is the midpoint Euler-Maclaurin estimate: exact continuum integrals
    beyond n = +-(cutoff + 1/2) plus the first derivative correction. Without it the
    symmetric window converges like 1/cutoff; with it the error is O(cutoff**-3).
    """
    z0 = _z_free(q, params)
    _check_finite(lam)
    a, c = params.a, params.c
    n = np.arange(-cutoff, cutoff + 1, dtype=np.float64)
    y = _frac_parts(n, lam, a, c)
    # z_n - z0 computed from integer offsets to keep precision
    d = np.pi * (n - round(z0 / np.pi)) + y
    s1 = float(np.sum(1.0 / d))
    s2 = float(np.sum(1.0 / (d * d)))
    if tail:
        t1, t2 = window_tail_sums(z0, lam, params, cutoff)
        s1 += t1
        s2 += t2
    return float(s1), float(s2)


def entire_f(z, lam: float, params: PhysicsParams):
    """f(z, lambda) = cos z - (a z - 2 lambda/c) sin z, whose zeros are the z_n(lambda)."""
    z = np.asarray(z, dtype=np.complex128)
    _check_finite(z, lam)
    return np.cos(z) - (params.a * z - 2.0 * lam / params.c) * np.sin(z)


def log_derivative_g(z, lam: float, params: PhysicsParams):
    """g(z, lambda) = f'(z)/f(z); tends to cot z as lambda -> +-inf."""
    z = np.asarray(z, dtype=np.complex128)
    if np.isinf(lam):
        _check_finite(z)
        if np.any(np.abs(np.sin(z)) < 1e-300):
            raise PoleError("g(z, +-inf) = cot z evaluated at a pole")
        return np.cos(z) / np.sin(z)
    f = entire_f(z, lam, params)
    w = params.a * z - 2.0 * lam / params.c
    num = -((1.0 + params.a) * np.sin(z) + w * np.cos(z))
    scale = np.abs(np.cos(z)) + np.abs(w * np.sin(z))
    if np.any(np.abs(f) <= 1e-14 * scale):
        raise PoleError(f"g(z, lambda) evaluated at a zero of f (z={z})")
    return num / f
