"""Gaussian-phase integrals with a simple pole.

The two primitives are

    gauss_fresnel(x, t)  = int e^{-i tau(k)} dk,
    pole_integral(a,x,t) = int e^{-i tau(k)} / (k - a) dk,      tau(k) = t k^2 - x k,

the second for complex ``a`` (off the real axis), as a principal value for
real ``a``, and as a derivative with respect to ``a``. For t > 0, with
k* = x/(2t), kappa = e^{i pi/4} sqrt(t) and zeta = (a - k*) kappa,

    I(a) = i pi sigma e^{i x^2/(4t)} w(sigma zeta),      sigma = sign(Im a),

which is the analytic continuation of the upper/lower half-plane result. Where
``sigma zeta`` falls in the lower half-plane the reflection of w is written out
with e^{-i tau(a)} computed directly. t < 0 follows from
I(a; x, t) = conj(I(conj a; -x, |t|)); t = 0 is the Fourier transform of the pole.

``pole_integral_oracle`` evaluates the same integrals by adaptive quadrature on
a rotated contour plus residues and never touches the closed forms.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError
from .faddeeva import wofz, wofz_deriv

__all__ = [
    "VARIANTS",
    "PoleIntegralRequest",
    "gauss_fresnel",
    "pole_integral",
    "pole_integral_array",
    "pole_integral_oracle",
    "gauss_fresnel_oracle",
]

VARIANTS = ("complex-pole", "principal-value", "derivative", "pv-derivative")

_EIGHTH = cmath.exp(0.25j * math.pi)


@dataclass(frozen=True)
class PoleIntegralRequest:
    """One evaluation of int e^{-i tau(k)}/(k - a) dk (or its a-derivative)."""

    a: complex
    x: float
    t: float
    variant: str = "complex-pole"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        a = complex(self.a)
        if not (cmath.isfinite(a) and math.isfinite(self.x) and math.isfinite(self.t)):
            raise DomainError("non-finite pole integral request")
        real_pole = self.variant in ("principal-value", "pv-derivative")
        if real_pole and a.imag != 0.0:
            raise DomainError("principal value needs a real pole")
        if not real_pole and a.imag == 0.0:
            raise DomainError("complex-pole variants need Im a != 0; use principal-value")
        object.__setattr__(self, "a", a)


def _phase(a, x, t):
    """e^{-i tau(a)} for complex a."""
    return np.exp(-1j * (t * a * a - x * a))


def gauss_fresnel(x: float, t: float) -> complex:
    """int e^{-i(t k^2 - x k)} dk = sqrt(pi/|t|) e^{-i pi sgn(t)/4} e^{i x^2/(4t)}."""
    if t == 0.0:
        raise DomainError("at t = 0 the integral is a delta function; use the equal-time path")
    return complex(math.sqrt(math.pi / abs(t)) * cmath.exp(-0.25j * math.pi * math.copysign(1.0, t) + 1j * x * x / (4.0 * t)))


# --------------------------------------------------------------- closed forms


def _complex_pole_pos_t(a, x, t, derivative):
    sigma = np.where(a.imag > 0.0, 1.0, -1.0)
    kappa = _EIGHTH * math.sqrt(t)
    E = cmath.exp(1j * x * x / (4.0 * t))
    z = sigma * (a - x / (2.0 * t)) * kappa
    up = z.imag >= 0.0
    zu = np.where(up, z, -z)
    # e^{-i tau(a)} is only needed (and only bounded) below the axis
    ph = np.zeros_like(a)
    ph[~up] = _phase(a[~up], x, t)
    if not derivative:
        w = wofz(zu)
        val = np.where(up, E * w, 2.0 * ph - E * w)
        return 1j * math.pi * sigma * val
    dw = wofz_deriv(zu)
    # d/da [w(z)] = sigma kappa w'(z); w'(z) = -4 z e^{-z^2} + w'(-z) below the axis
    val = np.where(up, E * dw, -4.0 * z * ph + E * dw)
    return 1j * math.pi * kappa * val


def _pv_pos_t(a, x, t, derivative):
    kappa = _EIGHTH * math.sqrt(t)
    E = cmath.exp(1j * x * x / (4.0 * t))
    zeta = (a - x / (2.0 * t)) * kappa
    up = zeta.imag >= 0.0
    zu = np.where(up, zeta, -zeta)
    sgn = np.where(up, 1.0, -1.0)
    ph = _phase(a, x, t)
    if not derivative:
        # average of the two half-plane limits: i pi [E w(zeta) - e^{-i tau(a)}]
        return 1j * math.pi * sgn * (E * wofz(zu) - ph)
    return 1j * math.pi * kappa * (E * wofz_deriv(zu) + sgn * 2.0 * zeta * ph)


def _t_zero(a, x, variant):
    """Fourier transform of the pole at t = 0 (distributional limit)."""
    ph = np.exp(1j * x * a)
    if variant in ("principal-value", "pv-derivative"):
        if x == 0.0:
            return np.zeros_like(a)
        val = 1j * math.pi * math.copysign(1.0, x) * ph
    else:
        if x > 0.0:
            val = np.where(a.imag > 0.0, 2j * math.pi * ph, 0.0)
        elif x < 0.0:
            val = np.where(a.imag < 0.0, -2j * math.pi * ph, 0.0)
        else:
            # symmetric limit of int dk/(k - a): +-i pi by half-plane
            val = np.where(a.imag > 0.0, 1j * math.pi, -1j * math.pi) + 0.0 * a
            if variant == "derivative":
                return np.zeros_like(a)
            return val
    if variant in ("derivative", "pv-derivative"):
        return 1j * x * val
    return val


def pole_integral_array(a, x: float, t: float, variant: str = "complex-pole") -> np.ndarray:
    """Vectorised pole integral over an array of poles sharing (x, t)."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    a = np.asarray(a, dtype=np.complex128)
    real_pole = variant in ("principal-value", "pv-derivative")
    if real_pole and np.any(a.imag != 0.0):
        raise DomainError("principal value needs real poles")
    if not real_pole and np.any(a.imag == 0.0):
        raise DomainError("pole on the real axis requested as complex-pole")
    derivative = variant in ("derivative", "pv-derivative")
    if t == 0.0:
        return _t_zero(a, x, variant)
    if t > 0.0:
        fn = _pv_pos_t if real_pole else _complex_pole_pos_t
        return fn(a, x, t, derivative)
    fn = _pv_pos_t if real_pole else _complex_pole_pos_t
    return np.conj(fn(np.conj(a), -x, -t, derivative))


def pole_integral(req: PoleIntegralRequest) -> complex:
    return complex(pole_integral_array(np.array([req.a]), req.x, req.t, req.variant)[0])


# ------------------------------------------------------------------- oracle


def _rotated_quad(f, pivot, omega, half_width, breaks=()):
    def part(fn):
        with warnings.catch_warnings():
            # asking for 1e-13 routinely hits the roundoff floor; that is fine here
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(fn, -half_width, half_width, points=list(breaks) or None, limit=400, epsabs=0.0, epsrel=1e-13)
        return val

    re = part(lambda s: (f(pivot + omega * s) * omega).real)
    im = part(lambda s: (f(pivot + omega * s) * omega).imag)
    return complex(re, im)


def gauss_fresnel_oracle(x: float, t: float) -> complex:
    if t == 0.0:
        raise DomainError("no oracle at t = 0")
    if t < 0.0:
        return gauss_fresnel_oracle(-x, -t).conjugate()
    omega = cmath.exp(-0.25j * math.pi)
    return _rotated_quad(lambda k: cmath.exp(-1j * (t * k * k - x * k)), x / (2.0 * t), omega, math.sqrt(80.0 / t))


def pole_integral_oracle(a: complex, x: float, t: float, variant: str = "complex-pole") -> complex:
    """Adaptive quadrature on k = p + e^{-i pi/4} s (t > 0) plus residues of swept poles.

    The rotated line makes e^{-i tau} a Gaussian in s. Poles inside the wedges
    between the real axis and the line contribute -2 pi i Res (right wedge, below
    the axis) or +2 pi i Res (left wedge, above the axis); a real pole on the
    boundary contributes half of that, which yields the principal value.
    """
    if t == 0.0:
        raise DomainError("the oracle needs t != 0")
    a = complex(a)
    if t < 0.0:
        return pole_integral_oracle(a.conjugate(), -x, -t, variant).conjugate()
    derivative = variant in ("derivative", "pv-derivative")
    power = 2 if derivative else 1
    kstar = x / (2.0 * t)
    scale = 1.0 / math.sqrt(t)
    pivot = kstar
    # keep the pole away from the line's vertex
    omega = cmath.exp(-0.25j * math.pi)
    if abs(a - pivot) < 0.5 * scale:
        pivot = kstar - math.copysign(1.0, (a - kstar).real or 1.0) * scale
    # and off the line itself
    if abs(((a - pivot) * omega.conjugate()).imag) < 0.2 * scale:
        pivot += 0.5 * scale

    def f(k):
        return cmath.exp(-1j * (t * k * k - x * k)) / (k - a) ** power

    # the line is nearest to the pole at s = Re((a - pivot) conj(omega))
    s_near = ((a - pivot) * omega.conjugate()).real
    half_width = math.sqrt(80.0 / t) + abs(pivot - kstar) / math.sqrt(0.5)
    breaks = (s_near,) if abs(s_near) < half_width else ()
    val = _rotated_quad(f, pivot, omega, half_width, breaks)

    d = a - pivot
    res = _phase(a, x, t)
    if derivative:
        res = -1j * (2.0 * t * a - x) * res
    arg = math.atan2(d.imag, d.real)
    quarter = 0.25 * math.pi
    if d.imag == 0.0:
        weight = -0.5 if d.real > 0 else 0.5
    elif -quarter < arg < 0.0:
        weight = -1.0
    elif 3.0 * quarter < arg < math.pi:
        weight = 1.0
    else:
        weight = 0.0
    return val + weight * 2j * math.pi * res
