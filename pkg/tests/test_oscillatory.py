import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impgreen.errors import DomainError
from impgreen.oscillatory import (
    PoleIntegralRequest,
    gauss_fresnel,
    gauss_fresnel_oracle,
    pole_integral,
    pole_integral_array,
    pole_integral_oracle,
)


def rel(a, b, floor=1e-6):
    # PV integrals vanish at a = k* by symmetry; the floor keeps that case meaningful
    return abs(a - b) / max(abs(b), floor)


def test_fresnel_oracle():
    assert rel(gauss_fresnel(0.0, 1.0), gauss_fresnel_oracle(0.0, 1.0)) < 1e-9
    assert rel(gauss_fresnel(1.3, -0.4), gauss_fresnel_oracle(1.3, -0.4)) < 1e-9


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-5, 5), t=st.floats(0.01, 10))
def test_fresnel_scaling_and_conjugation(x, t):
    g = gauss_fresnel(x, t)
    assert abs(abs(g) - math.sqrt(math.pi / t)) < 1e-12 * abs(g)
    assert abs(gauss_fresnel(x, -t) - g.conjugate()) < 1e-12 * abs(g)


def test_fresnel_t_zero():
    with pytest.raises(DomainError):
        gauss_fresnel(1.0, 0.0)


def test_request_validation():
    with pytest.raises(DomainError):
        PoleIntegralRequest(0.5, 1.0, 1.0, "complex-pole")
    with pytest.raises(DomainError):
        PoleIntegralRequest(0.5 + 1j, 1.0, 1.0, "principal-value")
    with pytest.raises(DomainError):
        PoleIntegralRequest(1j, 1.0, 1.0, "bogus")


def test_unit_imaginary_pole():
    val = pole_integral(PoleIntegralRequest(1j, 0.0, 1.0))
    assert rel(val, pole_integral_oracle(1j, 0.0, 1.0)) < 1e-9


def test_pv_is_average_of_limits():
    a, x, t, eps = 0.3, 1.2, 0.7, 1e-7
    pv = pole_integral(PoleIntegralRequest(a, x, t, "principal-value"))
    up = pole_integral(PoleIntegralRequest(a + 1j * eps, x, t))
    dn = pole_integral(PoleIntegralRequest(a - 1j * eps, x, t))
    assert abs(pv - 0.5 * (up + dn)) < 1e-6 * abs(pv)


def test_plemelj_jump():
    a, x, t, eps = -0.4, 0.5, 1.5, 1e-9
    up = pole_integral(PoleIntegralRequest(a + 1j * eps, x, t))
    dn = pole_integral(PoleIntegralRequest(a - 1j * eps, x, t))
    assert abs(up - dn - 2j * math.pi * cmath.exp(-1j * (t * a * a - x * a))) < 1e-6


def test_t_zero_closed_forms():
    a = 0.4 + 0.8j
    assert abs(pole_integral(PoleIntegralRequest(a, 1.5, 0.0)) - 2j * math.pi * cmath.exp(1.5j * a)) < 1e-15
    assert pole_integral(PoleIntegralRequest(a, -1.5, 0.0)) == 0


def test_t_zero_is_small_t_limit():
    """The approach to t = 0 is O(sqrt t) (near-field Fresnel term)."""
    a, x = 0.4 + 0.8j, 1.5
    at0 = pole_integral(PoleIntegralRequest(a, x, 0.0))
    errs = [abs(pole_integral(PoleIntegralRequest(a, x, t)) - at0) for t in (1e-4, 1e-6, 1e-8)]
    assert errs[0] > errs[1] > errs[2]
    assert 3 < errs[1] / errs[2] < 30


@pytest.mark.parametrize("variant,a", [("complex-pole", 0.4 + 0.8j), ("principal-value", 0.3 + 0j), ("derivative", -0.2 - 0.5j)])
@pytest.mark.parametrize("t", [1e-4, -1e-4])
def test_small_t_no_crossover_needed(variant, a, t):
    val = pole_integral(PoleIntegralRequest(a, 1.5, t, variant))
    assert rel(val, pole_integral_oracle(a, 1.5, t, variant)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(
    ar=st.floats(-3, 3),
    ai=st.floats(0.05, 2).flatmap(lambda v: st.sampled_from([v, -v])),
    x=st.floats(-5, 5),
    t=st.floats(0.05, 10).flatmap(lambda v: st.sampled_from([v, -v])),
)
def test_complex_pole_vs_oracle(ar, ai, x, t):
    a = complex(ar, ai)
    for variant in ("complex-pole", "derivative"):
        val = complex(pole_integral_array(np.array([a]), x, t, variant)[0])
        assert rel(val, pole_integral_oracle(a, x, t, variant)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-3, 3), x=st.floats(-5, 5), t=st.floats(0.05, 10).flatmap(lambda v: st.sampled_from([v, -v])))
def test_pv_vs_oracle(a, x, t):
    for variant in ("principal-value", "pv-derivative"):
        val = complex(pole_integral_array(np.array([a + 0j]), x, t, variant)[0])
        assert rel(val, pole_integral_oracle(a, x, t, variant)) < 1e-9


@pytest.mark.parametrize("a", [0.3 + 0.5j, -1.0 - 0.2j])
def test_derivative_finite_difference(a):
    x, t, h = 0.9, 0.6, 1e-5
    f = lambda z: pole_integral(PoleIntegralRequest(z, x, t))
    fd = (f(a + h) - f(a - h)) / (2 * h)
    d = pole_integral(PoleIntegralRequest(a, x, t, "derivative"))
    assert abs(d - fd) < 1e-6 * abs(d)


def test_large_argument_no_overflow():
    with np.errstate(all="raise"):
        val = pole_integral_array(np.array([40.0 - 0.3j]), 0.0, 8.0)
    assert np.all(np.isfinite(val))
