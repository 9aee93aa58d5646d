"""The impurity Green's function in the thermodynamic limit.

With lambda = -(c/2) cot(theta) the lambda integral becomes

    G(x, t) = (1/pi) int_0^pi dtheta det(1 + V) (g_hat - rho_hat),

where g_hat = g / sin^2(theta), rho_hat = r_hat^T (1 + V)^{-1} r_hat / (2 pi),
r_hat samples e_+ / sin(theta) and V is built from the unscaled e. This is the
braces det(1 + V - R) + (g - 1) det(1 + V), divided by sin^2(theta) and
rewritten with the determinant lemma, so the two O(1) determinants never cancel
against each other. The same formula covers c = inf with g_hat = g_inf and
e = e_inf.

At t = 0 the answer is delta(x). ``equal_time`` returns it exactly and exposes
the numerical pieces: the smeared p = 0 term and the p >= 1 residual, integrated
along a line Im lambda = eta in the half-plane where the closed forms decay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergenceError
from .fredholm import ORDER_CAP, ORDER_START, gauss_legendre, lemma_terms
from .kernels import (
    DIAG_FRACTION,
    NodeKernels,
    assemble_v_matrix,
    e_equal_time,
    e_minus,
    g_equal_time,
)
from .params import PhysicsParams
from .quadrature import gk15_adaptive

__all__ = [
    "DELTA_AT_ORIGIN",
    "GreensValue",
    "EqualTimeResult",
    "integrand_theta",
    "choose_order",
    "greens",
    "greens_infinite_c",
    "equal_time",
    "equal_time_residual",
    "smeared_equal_time",
]

ENDPOINT_EPS = 1e-5
DEFAULT_TOL = 1e-6
DEFAULT_DET_TOL = 1e-10


class _DeltaMarker:
    """Stands for delta(x) at x = 0, which has no finite value."""

    def __repr__(self):
        return "DELTA_AT_ORIGIN"


DELTA_AT_ORIGIN = _DeltaMarker()


@dataclass(frozen=True)
class GreensValue:
    value: complex
    abs_error_estimate: float
    theta_evaluations: int
    det_order: int
    converged: bool = True
    diagnostics: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.abs_error_estimate >= 0:
            raise ValueError("error estimate must be non-negative")


def _integrand(kern: NodeKernels, theta: float, keep=None) -> complex:
    gh, M, r = kern.matrices(theta)
    d, rho = lemma_terms(M, r)
    if keep is not None:
        keep.append((theta, d, d * (1.0 - rho), gh))
    return d * (gh - rho) / math.pi


def integrand_theta(theta: float, x: float, t: float, params: PhysicsParams, order: int = 64, kernels: NodeKernels | None = None) -> complex:
    """The theta integrand; endpoints use the one-sided extrapolation 2 f(eps) - f(2 eps)."""
    if not 0.0 <= theta <= math.pi:
        raise DomainError("theta must lie in [0, pi]")
    if kernels is None:
        nodes, weights = gauss_legendre(params.k_F, order)
        kernels = NodeKernels(x, t, params, nodes, weights)
    if theta == 0.0:
        return 2.0 * _integrand(kernels, ENDPOINT_EPS) - _integrand(kernels, 2.0 * ENDPOINT_EPS)
    if theta == math.pi:
        return 2.0 * _integrand(kernels, math.pi - ENDPOINT_EPS) - _integrand(kernels, math.pi - 2.0 * ENDPOINT_EPS)
    return _integrand(kernels, theta)


def _kernels(x, t, params, order):
    nodes, weights = gauss_legendre(params.k_F, order)
    return NodeKernels(x, t, params, nodes, weights)


def choose_order(x: float, t: float, params: PhysicsParams, det_tol: float = DEFAULT_DET_TOL, start: int = ORDER_START, cap: int = ORDER_CAP, theta: float = 0.5 * math.pi):
    """Smallest doubled order at which the integrand at ``theta`` moves by < det_tol."""
    order = start
    history = [(order, integrand_theta(theta, x, t, params, kernels=_kernels(x, t, params, order)))]
    while order < cap:
        order *= 2
        history.append((order, integrand_theta(theta, x, t, params, kernels=_kernels(x, t, params, order))))
        if abs(history[-1][1] - history[-2][1]) < det_tol:
            return order, history
    raise NonConvergenceError(f"integrand at theta={theta:.6g} not converged by order {cap}", history)


def _integrate(kern, tol, max_panels, keep):
    return gk15_adaptive(lambda th: _integrand(kern, th, keep), 0.0, math.pi, tol, max_panels=max_panels, min_panels=4)


def greens(
    x: float,
    t: float,
    params: PhysicsParams,
    tol: float = DEFAULT_TOL,
    *,
    order: int | None = None,
    det_tol: float = DEFAULT_DET_TOL,
    order_cap: int = ORDER_CAP,
    max_panels: int = 400,
    keep_diagnostics: bool = False,
) -> GreensValue:
    """G(x, t) by adaptive Gauss-Kronrod over theta.

    Unless ``order`` is given, the Nystrom order is picked once at theta = pi/2
    and then spot-checked at the centres of the outermost panels; if either
    moves by more than ``det_tol`` on doubling, the order is doubled and the
    integral redone.
    """
    if not (math.isfinite(x) and math.isfinite(t)):
        raise DomainError("x and t must be finite")
    if t == 0.0:
        val = equal_time(x, params)
        if val is DELTA_AT_ORIGIN:
            raise DomainError("G(0, 0) is a delta function; see equal_time")
        return GreensValue(val, 0.0, 0, 0)
    fixed = order is not None
    if not fixed:
        order, _ = choose_order(x, t, params, det_tol, cap=order_cap)
    while True:
        keep = [] if keep_diagnostics else None
        kern = _kernels(x, t, params, order)
        res = _integrate(kern, tol, max_panels, keep)
        if fixed or order >= order_cap:
            break
        # outermost panels: [0, h] and [pi - h, pi] with h from the panel count
        h = math.pi / max(4, res.panels)
        probe = (0.5 * h, math.pi - 0.5 * h)
        finer = _kernels(x, t, params, 2 * order)
        if all(abs(_integrand(kern, th) - _integrand(finer, th)) < det_tol for th in probe):
            break
        order *= 2
    diag = tuple(sorted(keep)) if keep_diagnostics else ()
    return GreensValue(res.value, res.abs_error, res.evaluations, order, res.converged, diag)


def greens_infinite_c(x: float, t: float, k_F: float, tol: float = DEFAULT_TOL, **kwargs) -> GreensValue:
    """The c = inf Green's function through the same theta integrator."""
    return greens(x, t, PhysicsParams.thermodynamic(math.inf, k_F), tol, **kwargs)


# ---------------------------------------------------------------- equal time


@dataclass(frozen=True)
class EqualTimeResult:
    value: object
    residual: complex
    residual_error: float


def _residual_integrand(lam: complex, x: float, params: PhysicsParams, nodes, sqrt_w, em, delta):
    """(2/(pi c)) [(det(1+V) - 1) g - det(1+V) rho] at complex lambda, t = 0."""
    c = params.c
    e = e_equal_time(nodes, x, lam, c)
    sgn = math.copysign(1.0, x)
    den = 2.0 * nodes - 2.0 * lam - 1j * c * sgn
    de = c * (1j * x * np.exp(1j * nodes * x) * den - 2.0 * (np.exp(1j * nodes * x) - np.exp(1j * x * lam - 0.5 * c * abs(x)))) / den**2
    M = assemble_v_matrix(nodes, sqrt_w, em, e, de, delta)
    r = sqrt_w * em * e
    d, rho = lemma_terms(M, r)
    g = complex(g_equal_time(x, lam, c))
    return 2.0 / (math.pi * c) * ((d - 1.0) * g - d * rho)


def equal_time_residual(x: float, params: PhysicsParams, order: int = 64, tol: float = 1e-12, eta: float | None = None):
    """Integral over lambda of everything beyond the p = 0 term, at t = 0.

    The integrand is analytic in the half-plane sgn(x) Im lambda > 0, so the line
    is moved to Im lambda = eta sgn(x) (default 40/|x|, which suppresses the
    e^{i x lambda} parts to ~e^{-40}). Along the line lambda = i eta sgn(x) + s
    with s = s0 tan(u) the remaining terms decay like 1/s^2.
    """
    if x == 0.0:
        raise DomainError("the residual is only defined for x != 0")
    if not math.isfinite(params.c):
        raise DomainError("equal-time residual needs finite c")
    eta = 40.0 / abs(x) if eta is None else eta
    shift = 1j * eta * math.copysign(1.0, x)
    nodes, weights = gauss_legendre(params.k_F, order)
    sqrt_w = np.sqrt(weights)
    em = e_minus(nodes, x, 0.0)
    delta = DIAG_FRACTION * params.k_F
    s0 = max(params.c, params.k_F, eta)

    def f(u):
        s = s0 * math.tan(u)
        return _residual_integrand(shift + s, x, params, nodes, sqrt_w, em, delta) * s0 / math.cos(u) ** 2

    h = 0.5 * math.pi
    res = gk15_adaptive(f, -h + 1e-12, h - 1e-12, tol, min_panels=4)
    return res.value, res.abs_error


def equal_time(x: float, params: PhysicsParams):
    """G(x, 0) = delta(x): 0 away from the origin, ``DELTA_AT_ORIGIN`` at x = 0."""
    if x == 0.0:
        return DELTA_AT_ORIGIN
    return 0j


def equal_time_diagnostic(x: float, params: PhysicsParams, order: int = 64) -> EqualTimeResult:
    """Exact value plus the numerically integrated p >= 1 residual (should be ~0)."""
    res, err = equal_time_residual(x, params, order)
    return EqualTimeResult(equal_time(x, params), res, err)


def smeared_equal_time(phi, params: PhysicsParams, width: float, tol: float = 1e-9, x_nodes: int = 800) -> complex:
    """int phi(x) G(x, 0) dx from the p = 0 term: (1/2pi) int dlambda Phi(lambda),

    Phi(lambda) = int phi(x) e^{-c|x|/2 + i x lambda} dx, by Gauss-Legendre on
    [-8 w, 0] and [0, 8 w] so the kink at 0 is a panel edge. The kink makes Phi
    decay like 1/lambda^2; the lambda-integral runs over |lambda| < 200/w and the
    remainder is the 1/lambda^2 tail fitted to Phi(+-Lambda). (The p >= 1 residual
    vanishes to the precision of :func:`equal_time_residual`.)
    """
    c = params.c
    X = 8.0 * width
    xg, wg = np.polynomial.legendre.leggauss(x_nodes)
    xs = np.concatenate([0.5 * X * (xg - 1.0), 0.5 * X * (xg + 1.0)])
    ws = np.concatenate([0.5 * X * wg, 0.5 * X * wg])
    base = ws * np.asarray(phi(xs)) * np.exp(-0.5 * c * np.abs(xs))

    def transform(lam):
        return complex(np.dot(base, np.exp(1j * xs * lam)))

    cut = 200.0 / width
    res = gk15_adaptive(transform, -cut, cut, tol, max_panels=4000, min_panels=16)
    tail = (transform(cut) + transform(-cut)) * cut
    return (res.value + tail) / (2.0 * math.pi)
