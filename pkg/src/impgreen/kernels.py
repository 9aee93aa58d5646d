"""Thermodynamic-limit functions g(x,t;lambda), e(q|lambda) and the kernels V, R.

With Lor(k) = 1 + 4(k - lambda)^2/c^2 and a_pm = lambda +- i c/2 the Lorentzian
splits into simple poles, so

    g = (1/2pi) (c/4i) [I(a+) - I(a-)],
    e = (1/pi) [PV(q)/Lor(q) - (ic/4) I(a+)/(a+ - q) + (ic/4) I(a-)/(a- - q)]
        + 2 (q - lambda) e^{-i tau(q)} / (c Lor(q)),

where I(a) = int e^{-i tau(k)}/(k - a) dk and PV(q) is its principal value on the
real axis. PV(q) does not depend on lambda, so the production path
(:class:`NodeKernels`) computes it once per (x, t) on the quadrature nodes.

The lambda line is parametrised by lambda = -(c/2) cot(theta), theta in (0, pi).
Near the endpoints g ~ sin^2(theta) and e ~ sin(theta). After dividing the
theta-integrand by sin^2 the production path needs g_hat = g / sin^2 and
r_hat = e_+ / sin, which stay finite, while V keeps the unscaled e. At c = inf
g_hat = g_inf and e = e_inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from .errors import DomainError
from .oscillatory import gauss_fresnel, pole_integral_array
from .params import PhysicsParams

__all__ = [
    "DIAG_FRACTION",
    "KernelContext",
    "lambda_of_theta",
    "theta_of_lambda",
    "tau",
    "e_minus",
    "g_lambda",
    "e_q",
    "de_dq",
    "e_plus",
    "kernel_V",
    "kernel_R",
    "g_infinite",
    "e_infinite",
    "de_infinite_dq",
    "kernel_V_infinite",
    "kernel_R_infinite",
    "g_equal_time",
    "e_equal_time",
    "NodeKernels",
    "assemble_v_matrix",
]

DIAG_FRACTION = 1e-4


def tau(q, x: float, t: float):
    return t * q * q - x * q


def e_minus(q, x: float, t: float):
    return np.exp(0.5j * tau(np.asarray(q, dtype=np.float64), x, t))


def lambda_of_theta(theta: float, c: float) -> float:
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie in (0, pi)")
    return -0.5 * c * math.cos(theta) / math.sin(theta)


def theta_of_lambda(lam: float, c: float) -> float:
    """Inverse of lambda = -(c/2) cot(theta), valued in (0, pi)."""
    return math.atan2(1.0, -2.0 * lam / c)


@dataclass(frozen=True)
class KernelContext:
    """One (x, t, lambda) point at finite coupling."""

    x: float
    t: float
    lam: float
    params: PhysicsParams

    def __post_init__(self):
        for v in (self.x, self.t, self.lam):
            if not math.isfinite(v):
                raise DomainError("kernel context needs finite x, t, lambda")
        if not math.isfinite(self.params.c):
            raise DomainError("use the *_infinite functions at c = inf")

    @classmethod
    def at_theta(cls, x: float, t: float, theta: float, params: PhysicsParams) -> "KernelContext":
        return cls(x, t, lambda_of_theta(theta, params.c), params)

    @property
    def c(self) -> float:
        return self.params.c

    @property
    def poles(self) -> tuple[complex, complex]:
        return complex(self.lam, 0.5 * self.c), complex(self.lam, -0.5 * self.c)

    def tau(self, q):
        return tau(q, self.x, self.t)

    def pole_values(self) -> tuple[complex, complex]:
        ap, am = self.poles
        vals = pole_integral_array(np.array([ap, am]), self.x, self.t)
        return complex(vals[0]), complex(vals[1])

    def lorentz(self, q):
        d = 2.0 * (np.asarray(q, dtype=np.float64) - self.lam) / self.c
        return 1.0 + d * d


# ----------------------------------------------------------- finite coupling


def g_lambda(ctx: KernelContext) -> complex:
    """(1/2pi) int e^{-i tau(k)} / Lor(k) dk."""
    ip, im = ctx.pole_values()
    return complex(ctx.c / (8j * math.pi) * (ip - im))


def _e_parts(q, ctx: KernelContext, pv, ip, im):
    q = np.asarray(q, dtype=np.float64)
    c = ctx.c
    ap, am = ctx.poles
    lor = ctx.lorentz(q)
    ph = np.exp(-1j * ctx.tau(q))
    poles = -0.25j * c * ip / (ap - q) + 0.25j * c * im / (am - q)
    return (pv / lor + poles) / math.pi + 2.0 * (q - ctx.lam) * ph / (c * lor)


def _e_deriv_parts(q, ctx: KernelContext, pv, dpv, ip, im):
    q = np.asarray(q, dtype=np.float64)
    c, lam = ctx.c, ctx.lam
    ap, am = ctx.poles
    lor = ctx.lorentz(q)
    dlor = 8.0 * (q - lam) / (c * c)
    ph = np.exp(-1j * ctx.tau(q))
    dtau = 2.0 * ctx.t * q - ctx.x
    first = dpv / lor - pv * dlor / (lor * lor)
    poles = -0.25j * c * ip / (ap - q) ** 2 + 0.25j * c * im / (am - q) ** 2
    last = (2.0 / c) * ph * (1.0 / lor - 1j * dtau * (q - lam) / lor - (q - lam) * dlor / (lor * lor))
    return (first + poles) / math.pi + last


def e_q(q, ctx: KernelContext):
    """e(q|lambda) with the principal-value prescription; scalar or array ``q``."""
    qa = np.atleast_1d(np.asarray(q, dtype=np.float64))
    pv = pole_integral_array(qa.astype(np.complex128), ctx.x, ctx.t, "principal-value")
    ip, im = ctx.pole_values()
    out = _e_parts(qa, ctx, pv, ip, im)
    return complex(out[0]) if np.ndim(q) == 0 else out


def de_dq(q, ctx: KernelContext):
    """d e(q|lambda)/dq from the derivative variants of the pole integrals."""
    qa = np.atleast_1d(np.asarray(q, dtype=np.float64))
    pv = pole_integral_array(qa.astype(np.complex128), ctx.x, ctx.t, "principal-value")
    dpv = pole_integral_array(qa.astype(np.complex128), ctx.x, ctx.t, "pv-derivative")
    ip, im = ctx.pole_values()
    out = _e_deriv_parts(qa, ctx, pv, dpv, ip, im)
    return complex(out[0]) if np.ndim(q) == 0 else out


def e_plus(q, ctx: KernelContext):
    return e_minus(q, ctx.x, ctx.t) * e_q(q, ctx)


def _v_from_e(q, qp, x, t, e_fn, de_fn, delta):
    shape = np.broadcast_shapes(np.shape(q), np.shape(qp))
    q, qp = np.broadcast_arrays(np.atleast_1d(np.asarray(q, dtype=np.float64)), np.asarray(qp, dtype=np.float64))
    scalar = q.size == 1 and np.ndim(qp) == 0
    q, qp = q.ravel(), qp.ravel()
    em = e_minus(q, x, t) * e_minus(qp, x, t)
    near = np.abs(q - qp) < delta
    dq = np.where(near, 1.0, q - qp)
    out = em * (e_fn(q) - e_fn(qp)) / (math.pi * dq)
    if np.any(near):
        mid = 0.5 * (q[near] + qp[near])
        out[near] = em[near] * np.atleast_1d(de_fn(mid)) / math.pi
    return complex(out[0]) if scalar else out.reshape(shape)


def kernel_V(q, qp, ctx: KernelContext, delta_diag: float | None = None):
    """V(q,q') = [e+(q) e-(q') - e-(q) e+(q')] / (pi (q - q')).

    Written as e-(q) e-(q') (e(q) - e(q'))/(pi (q - q')); for |q - q'| below
    ``delta_diag`` (default 1e-4 k_F) the derivative form at the midpoint is used.
    """
    delta = DIAG_FRACTION * ctx.params.k_F if delta_diag is None else delta_diag
    return _v_from_e(q, qp, ctx.x, ctx.t, lambda s: e_q(s, ctx), lambda s: de_dq(s, ctx), delta)


def kernel_R(q, qp, ctx: KernelContext):
    return e_plus(q, ctx) * e_plus(qp, ctx) / (2.0 * math.pi)


# ----------------------------------------------------------- infinite coupling


def g_infinite(x: float, t: float) -> complex:
    """g_inf = (1/2pi) int e^{-i tau(k)} dk."""
    return gauss_fresnel(x, t) / (2.0 * math.pi)


def e_infinite(q, x: float, t: float, theta: float):
    """e_inf(q|theta) = (sin^2/pi) PV int e^{-i tau}/(k - q) + sin cos e^{-i tau(q)}."""
    qa = np.atleast_1d(np.asarray(q, dtype=np.float64))
    pv = pole_integral_array(qa.astype(np.complex128), x, t, "principal-value")
    s, c = math.sin(theta), math.cos(theta)
    out = s * s * pv / math.pi + s * c * np.exp(-1j * tau(qa, x, t))
    return complex(out[0]) if np.ndim(q) == 0 else out


def de_infinite_dq(q, x: float, t: float, theta: float):
    qa = np.atleast_1d(np.asarray(q, dtype=np.float64))
    dpv = pole_integral_array(qa.astype(np.complex128), x, t, "pv-derivative")
    s, c = math.sin(theta), math.cos(theta)
    out = s * s * dpv / math.pi - 1j * (2.0 * t * qa - x) * s * c * np.exp(-1j * tau(qa, x, t))
    return complex(out[0]) if np.ndim(q) == 0 else out


def kernel_V_infinite(q, qp, x: float, t: float, theta: float, k_F: float, delta_diag: float | None = None):
    delta = DIAG_FRACTION * k_F if delta_diag is None else delta_diag
    return _v_from_e(q, qp, x, t, lambda s: e_infinite(s, x, t, theta), lambda s: de_infinite_dq(s, x, t, theta), delta)


def kernel_R_infinite(q, qp, x: float, t: float, theta: float):
    """R_inf = l+(q) l+(q') / (2 pi sin^2 theta)."""
    lp = e_minus(q, x, t) * e_infinite(q, x, t, theta)
    lpp = e_minus(qp, x, t) * e_infinite(qp, x, t, theta)
    return lp * lpp / (2.0 * math.pi * math.sin(theta) ** 2)


# ----------------------------------------------------------------- equal time


def g_equal_time(x: float, lam, c: float):
    """g(x, 0; lambda) = (c/4) e^{i x lambda - c|x|/2}; analytic in complex lambda."""
    return 0.25 * c * np.exp(1j * x * np.asarray(lam) - 0.5 * c * abs(x))


def e_equal_time(q, x: float, lam, c: float):
    """e(q|x, 0; lambda) = c (e^{iqx} - e^{ix lambda - c|x|/2}) / (2q - 2 lambda - i c sgn x)."""
    q = np.asarray(q, dtype=np.float64)
    lam = np.asarray(lam)
    sgn = 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)
    num = np.exp(1j * q * x) - np.exp(1j * x * lam - 0.5 * c * abs(x))
    return c * num / (2.0 * q - 2.0 * lam - 1j * c * sgn)


# ------------------------------------------------------------ production path


@njit
def _assemble_v_loop(q, sw, em, eh, deh, delta):
    n = q.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    inv_pi = 1.0 / math.pi
    for i in range(n):
        for j in range(n):
            d = q[i] - q[j]
            if abs(d) < delta:
                val = 0.5 * (deh[i] + deh[j])
            else:
                val = (eh[i] - eh[j]) / d
            out[i, j] = sw[i] * sw[j] * em[i] * em[j] * val * inv_pi
    return out


def _assemble_v_numpy(q, sw, em, eh, deh, delta):
    d = q[:, None] - q[None, :]
    near = np.abs(d) < delta
    val = np.where(near, 0.5 * (deh[:, None] + deh[None, :]), (eh[:, None] - eh[None, :]) / np.where(near, 1.0, d))
    return (sw * em)[:, None] * (sw * em)[None, :] * val / math.pi


_assemble_v = pick(_assemble_v_loop, _assemble_v_numpy)


def assemble_v_matrix(q, sqrt_w, em, ehat, dehat, delta):
    """Symmetrically weighted Nystrom matrix of the V kernel built from e and de/dq."""
    return _assemble_v(
        np.ascontiguousarray(q, dtype=np.float64),
        np.ascontiguousarray(sqrt_w, dtype=np.float64),
        np.ascontiguousarray(em, dtype=np.complex128),
        np.ascontiguousarray(ehat, dtype=np.complex128),
        np.ascontiguousarray(dehat, dtype=np.complex128),
        float(delta),
    )


class NodeKernels:
    """Scaled kernel data on fixed quadrature nodes for one (x, t).

    Everything lambda-independent (the principal values and their derivatives,
    the phases) is computed at construction; :meth:`scaled` then costs two pole
    integrals per theta at finite c and none at c = inf.
    """

    def __init__(self, x: float, t: float, params: PhysicsParams, nodes, weights):
        self.x = float(x)
        self.t = float(t)
        self.params = params
        self.nodes = np.ascontiguousarray(nodes, dtype=np.float64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.sqrt_w = np.sqrt(self.weights)
        qc = self.nodes.astype(np.complex128)
        self.pv = pole_integral_array(qc, x, t, "principal-value")
        self.dpv = pole_integral_array(qc, x, t, "pv-derivative")
        self.phase = np.exp(-1j * tau(self.nodes, x, t))
        self.em = e_minus(self.nodes, x, t)
        self.dtau = 2.0 * t * self.nodes - x
        self.delta = DIAG_FRACTION * params.k_F
        self.infinite = not math.isfinite(params.c)
        self._g_inf = None if t == 0.0 else g_infinite(x, t)

    def theta_data(self, theta: float):
        """(g_hat, e_hat, e, de/dq) at one theta; e and de/dq on the nodes."""
        s, co = math.sin(theta), math.cos(theta)
        if self.infinite:
            if self._g_inf is None:
                raise DomainError("infinite coupling at t = 0 is a delta function")
            eh = s * self.pv / math.pi + co * self.phase
            deh = s * self.dpv / math.pi - 1j * co * self.dtau * self.phase
            return self._g_inf, eh, s * eh, s * deh
        ctx = KernelContext.at_theta(self.x, self.t, theta, self.params)
        ip, im = ctx.pole_values()
        g = ctx.c / (8j * math.pi) * (ip - im)
        e = _e_parts(self.nodes, ctx, self.pv, ip, im)
        de = _e_deriv_parts(self.nodes, ctx, self.pv, self.dpv, ip, im)
        return g / (s * s), e / s, e, de

    def matrices(self, theta: float):
        """(g_hat, weighted V matrix, weighted r_hat) at one theta."""
        gh, eh, e, de = self.theta_data(theta)
        M = assemble_v_matrix(self.nodes, self.sqrt_w, self.em, e, de, self.delta)
        r = self.sqrt_w * self.em * eh
        return complex(gh), M, r
