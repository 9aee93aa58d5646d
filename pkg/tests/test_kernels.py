import math

import numpy as np
import pytest

from impgreen.kernels import (
    KernelContext,
    NodeKernels,
    de_dq,
    e_equal_time,
    e_infinite,
    e_minus,
    e_plus,
    e_q,
    g_equal_time,
    g_infinite,
    g_lambda,
    kernel_R,
    kernel_R_infinite,
    kernel_V,
    kernel_V_infinite,
    lambda_of_theta,
    tau,
    theta_of_lambda,
)
from impgreen.fredholm import gauss_legendre
from impgreen.oscillatory import pole_integral_oracle
from impgreen.params import PhysicsParams


def ctx(x, t, lam, c=2.0):
    return KernelContext(x, t, lam, PhysicsParams.thermodynamic(c, 1.0))


def test_tau():
    assert tau(0.0, 1.3, 0.7) == 0.0
    assert np.isrealobj(tau(np.linspace(-1, 1, 5), 1.0, 0.5))


def test_theta_map_roundtrip():
    for theta in (0.1, 1.0, math.pi / 2, 3.0):
        assert abs(theta_of_lambda(lambda_of_theta(theta, 2.0), 2.0) - theta) < 1e-14
    assert lambda_of_theta(math.pi / 2, 2.0) == pytest.approx(0.0, abs=1e-15)


def test_g_equal_time_values():
    assert g_lambda(ctx(0.0, 0.0, 0.7)) == pytest.approx(0.5)
    assert abs(g_lambda(ctx(2.0, 0.0, 1.0)) - 0.5 * np.exp(2j) * np.exp(-2)) < 1e-15


def test_g_vs_oracle():
    # g = (c/(8 i pi)) (I(lam + ic/2) - I(lam - ic/2)) with each I from the independent oracle
    c, x, t, lam = 2.0, 1.0, 0.5, 0.0
    ref = c / (8j * math.pi) * (pole_integral_oracle(lam + 1j, x, t) - pole_integral_oracle(lam - 1j, x, t))
    assert abs(g_lambda(ctx(x, t, lam)) - ref) < 1e-8


def test_e_equal_time():
    assert abs(e_q(0.3, ctx(0.0, 0.0, 0.4))) < 1e-15
    k = ctx(1.0, 0.0, 0.2)
    assert abs(e_q(0.5, k) - e_equal_time(0.5, 1.0, 0.2, 2.0)) < 1e-8


def test_e_matches_direct_quadrature():
    """e(q) from a direct PV quadrature of its defining integral."""
    from scipy.integrate import quad

    x, t, lam, c, q = 1.0, 0.5, 0.3, 2.0, 0.2
    lor = lambda k: 1 + 4 * (k - lam) ** 2 / c**2
    # subtract the pole, then integrate the regular remainder and the damped tail
    reg = lambda k: (np.exp(-1j * (t * k * k - x * k)) / lor(k) - np.exp(-1j * (t * q * q - x * q)) / lor(q)) / (k - q)
    def part(f):
        r = quad(lambda k: f(k).real, -60, 60, points=[q], limit=2000, epsabs=1e-12)[0]
        i = quad(lambda k: f(k).imag, -60, 60, points=[q], limit=2000, epsabs=1e-12)[0]
        return r + 1j * i
    # PV of the subtracted constant over [-60, 60] is log((60 - q)/(60 + q)); beyond |k| = 60 both pieces are < 1e-3 / 60^2
    pv = part(reg) + np.exp(-1j * (t * q * q - x * q)) / lor(q) * math.log((60 - q) / (60 + q))
    ref = pv / math.pi + 2 * (q - lam) * np.exp(-1j * (t * q * q - x * q)) / (c * lor(q))
    assert abs(e_q(q, ctx(x, t, lam)) - ref) < 1e-4


def test_de_dq_finite_difference():
    k, h = ctx(0.7, 0.9, -0.4), 1e-5
    fd = (e_q(0.31 + h, k) - e_q(0.31 - h, k)) / (2 * h)
    assert abs(de_dq(0.31, k) - fd) < 1e-7


def test_V_numerator_antisymmetry():
    k = ctx(1.0, 0.5, 0.2)
    rng = np.random.default_rng(0)
    for q, qp in rng.uniform(-1, 1, (10, 2)):
        num = lambda a, b: e_plus(a, k) * e_minus(b, 1.0, 0.5) - e_minus(a, 1.0, 0.5) * e_plus(b, k)
        assert abs(num(q, qp) + num(qp, q)) < 1e-15
        assert abs(kernel_V(q, qp, k) * math.pi * (q - qp) - num(q, qp)) < 1e-13


def test_V_diagonal_rule():
    k = ctx(1.0, 0.5, 0.2)
    q = 0.37
    assert abs(kernel_V(q, q, k) - kernel_V(q, q + 1e-5, k)) < 1e-6


def test_R_rank_one():
    k = ctx(1.0, 0.5, 0.2)
    q, qp, p, pp = 0.1, -0.5, 0.8, 0.3
    assert abs(kernel_R(q, qp, k) * kernel_R(p, pp, k) - kernel_R(q, pp, k) * kernel_R(p, qp, k)) < 1e-15
    assert kernel_R(q, qp, k) == pytest.approx(kernel_R(qp, q, k))


def test_kernels_decay_in_lambda():
    q = np.linspace(-1, 1, 9)
    sups = []
    for lam in (10.0, 100.0, 1000.0):
        k = ctx(1.0, 0.5, lam)
        sups.append(max(np.max(np.abs(kernel_V(q[:, None], q[None, :], k))), np.max(np.abs(kernel_R(q[:, None], q[None, :], k)))))
    assert sups[0] > sups[1] > sups[2]


def test_infinite_c_limit_of_e():
    theta, q, x, t = 1.1, 0.4, 1.0, 0.5
    ref = e_infinite(q, x, t, theta)
    errs = []
    for c in (1e2, 1e3, 1e4):
        errs.append(abs(e_q(q, ctx(x, t, lambda_of_theta(theta, c), c)) - ref))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3


def test_infinite_c_kernels_converge():
    theta, x, t = 0.8, 1.0, 0.5
    q = np.linspace(-1, 1, 5)
    Vinf = kernel_V_infinite(q[:, None], q[None, :], x, t, theta, 1.0)
    Rinf = kernel_R_infinite(q[:, None], q[None, :], x, t, theta)
    errs = []
    for c in (1e2, 1e3, 1e4):
        k = ctx(x, t, lambda_of_theta(theta, c), c)
        dV = np.max(np.abs(kernel_V(q[:, None], q[None, :], k) - Vinf))
        # R_inf is defined with the 1/sin^2 of the measure absorbed
        dR = np.max(np.abs(kernel_R(q[:, None], q[None, :], k) / math.sin(theta) ** 2 - Rinf))
        errs.append(dV + dR)
    assert errs[0] > errs[1] > errs[2]


def test_g_infinite():
    assert abs(g_infinite(1.0, 0.5) - np.sqrt(2 * np.pi) * np.exp(-0.25j * np.pi + 0.5j) / (2 * np.pi)) < 1e-15


def test_node_kernels_match_pointwise():
    p = PhysicsParams.thermodynamic(2.0, 1.0)
    nodes, weights = gauss_legendre(1.0, 16)
    nk = NodeKernels(1.0, 0.5, p, nodes, weights)
    theta = 1.2
    gh, M, r = nk.matrices(theta)
    k = KernelContext.at_theta(1.0, 0.5, theta, p)
    s = math.sin(theta)
    assert abs(gh - g_lambda(k) / s**2) < 1e-14
    sw = np.sqrt(weights)
    Vref = kernel_V(nodes[:, None], nodes[None, :], k)
    assert np.allclose(M, sw[:, None] * Vref * sw[None, :], atol=1e-13)
    assert np.allclose(r, sw * e_plus(nodes, k) / s, atol=1e-14)


def test_g_equal_time_complex_lambda():
    v = g_equal_time(1.0, 0.5 + 2j, 2.0)
    assert abs(v - 0.5 * np.exp(1j * (0.5 + 2j) - 1.0)) < 1e-15
