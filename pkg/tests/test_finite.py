import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impgreen.bethe import MINUS_INFINITY, ImpurityState, impurity_states
from impgreen.errors import BudgetExceededError, DomainError, InvalidStateError, PoleError
from impgreen.finite import (
    FreeSector,
    chi,
    finite_E,
    finite_E_raw,
    finite_matrices,
    form_factor,
    form_factor_bordered,
    greens_bruteforce,
    norm_by_quadrature,
    norm_const_sq,
    overlap,
    overlap_by_quadrature,
    state_weight,
    wavefunction_phi,
    xi_determinant,
    xi_multisum,
)
from impgreen.kernels import KernelContext, e_q
from impgreen.params import PhysicsParams


@pytest.fixture
def one():
    return PhysicsParams.finite(2.0, 10.0, 1)


@pytest.fixture
def two():
    return PhysicsParams.finite(2.0, 5.0, 2)


def test_free_sector(box):
    fs = FreeSector.ground_state(box)
    assert fs.m_labels == (-1, 0, 1)
    assert np.all(np.abs(fs.q) <= box.k_F + 1e-12)
    even = FreeSector.ground_state(PhysicsParams.finite(2.0, 8.0, 4))
    assert even.m_labels == (-1, 0, 1, 2)
    with pytest.raises(InvalidStateError):
        FreeSector(box, (0, 0, 1))


def test_chi_periodic(one):
    s = impurity_states([0, 2], one)[1]
    L = one.L
    for l in (0, 1):
        a, b = chi(l, -L / 3, s), chi(l, 2 * L / 3, s)
        assert abs(a - b) < 1e-10 * abs(b)


def test_chi_free_limit(one):
    s = ImpurityState.from_root([0, 2], 0, MINUS_INFINITY, one)
    y = 1.7
    assert abs(chi(1, y, s) + np.exp(1j * s.k[1] * y)) < 1e-14
    assert abs(s.k[1] - 2 * math.pi * 2 / one.L) < 1e-14


def test_wavefunction_antisymmetric(two):
    s = impurity_states([-1, 0, 2], two)[2]
    assert abs(wavefunction_phi([1.3, 1.3], s)) < 1e-14
    assert abs(wavefunction_phi([0.4, 2.2], s) + wavefunction_phi([2.2, 0.4], s)) < 1e-14


def test_jump_condition(one):
    s = impurity_states([0, 2], one)[1]
    f = lambda y: wavefunction_phi([y], s)
    h, L = 1e-4, one.L
    d0 = (-3 * f(0) + 4 * f(h) - f(2 * h)) / (2 * h)
    dL = (3 * f(L) - 4 * f(L - h) + f(L - 2 * h)) / (2 * h)
    assert abs(d0 - dL - one.c * f(0)) < 1e-8


def test_periodicity_in_two_particles(two):
    s = impurity_states([-1, 0, 2], two)[1]
    assert abs(wavefunction_phi([0.0, 1.1], s) - wavefunction_phi([two.L, 1.1], s)) < 1e-10


@pytest.mark.parametrize("labels", [(0, 1), (-2, 3), (1, 4)])
def test_norm_one_particle(one, labels):
    for s in impurity_states(labels, one):
        if not s.at_minus_infinity:
            assert abs(norm_by_quadrature(s) - 1.0) < 1e-8


def test_norm_two_particles(two):
    for s in impurity_states([-1, 0, 2], two):
        if not s.at_minus_infinity:
            assert abs(norm_by_quadrature(s) - 1.0) < 1e-6


def test_norm_free_limit(two):
    s = ImpurityState.from_root([-1, 0, 2], 0, MINUS_INFINITY, two)
    assert math.isclose(norm_const_sq(s), 1.0 / (4 * two.L**3 * 3))
    assert norm_const_sq(s) > 0


def test_orthogonality(one):
    # same total momentum 2 pi (sum n + m) / L, so Phi alone must carry the orthogonality
    a, b = impurity_states([0, 2], one)[1], impurity_states([-1, 3], one)[1]
    from impgreen.finite import _gauss_legendre

    y, w = _gauss_legendre(one.L, 64)
    ov = one.L * sum(wi * np.conj(wavefunction_phi([yi], a)) * wavefunction_phi([yi], b) for yi, wi in zip(y, w))
    assert abs(ov) < 1e-7


def test_overlap_vs_quadrature(one):
    free = FreeSector.ground_state(one)
    for labels in ((0, 1), (-1, 2), (0, 3)):
        for s in impurity_states(labels, one):
            assert abs(overlap(free, s) - overlap_by_quadrature(free, s)) < 1e-7


def test_overlap_free_limit_selection(one):
    free = FreeSector.ground_state(one)
    s_in = ImpurityState.from_root([0, 2], 0, MINUS_INFINITY, one)
    s_out = ImpurityState.from_root([1, 2], 0, MINUS_INFINITY, one)
    assert overlap(free, s_out) == 0.0
    assert abs(abs(overlap(free, s_in)) - 1 / math.sqrt(2 * one.L)) < 1e-14


@settings(max_examples=20, deadline=None)
@given(labels=st.lists(st.integers(-8, 8), min_size=4, max_size=4, unique=True))
def test_form_factor_forms_agree(labels):
    p = PhysicsParams.finite(2.0, 9.0, 3)
    free = FreeSector.ground_state(p)
    for s in impurity_states(sorted(labels), p):
        if s.at_minus_infinity:
            continue
        ref = form_factor_bordered(free, s)
        assert abs(form_factor(free, s) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_form_factor_row_swap(box):
    free = FreeSector.ground_state(box)
    s = impurity_states([-2, 0, 1, 5], box)[2]
    assert abs(form_factor(free.swapped(0, 2), s) + form_factor(free, s)) < 1e-12 * abs(form_factor(free, s))


def test_form_factor_pole_error(one):
    free = FreeSector.ground_state(one)
    s = impurity_states([0, 2], one)[1]
    with pytest.raises(PoleError):
        form_factor(np.array([s.k[0]]), s)


def test_single_state_weight(one):
    free = FreeSector.ground_state(one)
    s = impurity_states([0, 2], one)[1]
    x, t = 0.8, 0.3
    by_hand = (
        (math.factorial(1) ** 2) * norm_const_sq(s) * form_factor(free, s) ** 2 / one.L
        * np.exp(1j * (np.sum(t * free.q**2 - x * free.q) - np.sum(t * s.k**2 - x * s.k)))
    )
    assert abs(state_weight(free, s, x, t) - by_hand) < 1e-15


def test_bruteforce_hermiticity(one):
    free = FreeSector.ground_state(one)
    a = greens_bruteforce(1.1, 0.3, free, 20).value
    b = greens_bruteforce(-1.1, -0.3, free, 20).value
    assert abs(a - b.conjugate()) < 1e-12


def test_bruteforce_budget(box):
    with pytest.raises(BudgetExceededError):
        greens_bruteforce(1.0, 0.5, FreeSector.ground_state(box), 200, budget=1000)
    with pytest.raises(DomainError):
        greens_bruteforce(1.0, 0.5, FreeSector.ground_state(box), 0)


def test_bruteforce_equal_time_decays_in_mean(one):
    """Away from x = 0 the t = 0 sum tends to zero; pointwise partial sums
    oscillate (Dirichlet kernel in total momentum), so the Cesaro mean is used."""
    free = FreeSector.ground_state(one)
    r = greens_bruteforce(0.7 * one.L, 0.0, free, 80)
    means = [abs(np.mean(r.partial_sums()[5:M])) for M in (20, 40, 80)]
    assert means[0] > means[1] > means[2]
    assert means[2] < 2e-3


def test_bruteforce_equal_time_completeness(one):
    """sum over states of |overlap|^2 is 1/L per total-momentum sector: at x = 0
    the partial sums grow like (number of sectors) / L."""
    free = FreeSector.ground_state(one)
    r = greens_bruteforce(0.0, 0.0, free, 30)
    sums = r.partial_sums()
    growth = (sums[30] - sums[20]).real
    assert abs(growth * one.L / 20 - 1.0) < 0.05


def test_bruteforce_damped_converges(box):
    free = FreeSector.ground_state(PhysicsParams.finite(2.0, 3 * math.pi, 3))
    r = greens_bruteforce(1.0, 0.5 - 0.1j, free, 12)
    shells = np.abs(r.shells[6:])
    assert np.all(np.diff(shells) < 0)
    assert r.tail_estimate < 1e-3


def test_finite_E_raw_vs_regularized(box):
    q = 2 * math.pi / box.L
    a = finite_E(q, 0.3, 1.0, 0.5, box, 10_000)
    b = finite_E_raw(q, 0.3, 1.0, 0.5, box, 10_000)
    assert abs(a - b) < 1e-8


def test_finite_E_second_term_vanishes():
    p = PhysicsParams.finite(2.0, 10.0, 3)
    q = 2 * math.pi / p.L
    # x = t = 0, lambda = q: every term cancels
    assert abs(finite_E(q, q, 0.0, 0.0, p, 2000)) < 1e-6


def test_finite_E_thermodynamic_limit():
    q, lam, x, t = 0.5, 0.2, 1.0, 0.5
    ref = e_q(q, KernelContext(x, t, lam, PhysicsParams.thermodynamic(2.0, 1.0)))
    errs = []
    for L in (40.0, 160.0, 640.0):
        p = PhysicsParams.finite(2.0, L, 3)
        errs.append(abs(finite_E(q, lam, x, t, p, int(60 * L)) - ref))
    assert errs[0] > errs[1] > errs[2]


def test_matrices_structure(box):
    fm = finite_matrices(1.0, 0.5, FreeSector.ground_state(box), 0.2)
    sv = np.linalg.svd(fm.R, compute_uv=False)
    assert sv[1] < 1e-10 * sv[0]
    big = PhysicsParams.finite(2.0, 200.0, 3)
    V = finite_matrices(1.0, 0.5, FreeSector.ground_state(big), 0.2).V
    V_small = fm.V
    assert np.max(np.abs(V)) < np.max(np.abs(V_small))


@pytest.mark.parametrize("N,size", [(1, 4), (2, 6), (3, 7)])
def test_insertion_identity(N, size):
    rng = np.random.default_rng(N)
    p = PhysicsParams.finite(2.0, 4.0 + N, N)
    free = FreeSector.ground_state(p)
    for _ in range(5):
        K = rng.uniform(-4, 4, size)
        lam, s = rng.uniform(-2, 2), rng.uniform(-1, 1)
        a = xi_multisum(0.7, 0.4, free, lam, s, K)
        b = xi_determinant(0.7, 0.4, free, lam, s, momenta=K)
        assert abs(a - b) <= 1e-11 * abs(b)


def test_xi_continuous_in_s(box):
    free = FreeSector.ground_state(box)
    a = xi_determinant(1.0, 0.5, free, 0.1, 0.0, cutoff=500)
    b = xi_determinant(1.0, 0.5, free, 0.1, 1e-6, cutoff=500)
    assert abs(a - b) < 1e-4


def test_det_S_smooth_in_lambda(box):
    free = FreeSector.ground_state(box)
    lams = np.linspace(-5, 5, 41)
    d = np.array([np.linalg.det(finite_matrices(1.0, 0.5, free, lam, cutoff=400).S) for lam in lams])
    assert np.all(np.isfinite(d))
    second = np.abs(d[2:] - 2 * d[1:-1] + d[:-2])
    assert np.max(second) < 0.1
