"""Exact finite-volume quantities for N up-spins plus one impurity in a box of length L.

Everything here is an oracle for the thermodynamic code: wave functions and
their normalisation, form factors, the brute-force spectral sum over all
impurity states, and the N x N determinant representation built from k-sums.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bethe import (
    ImpurityState,
    _frac_parts,
    _solve_frac,
    alpha_of,
    find_lambda_roots_batch,
    u_of,
    window_tail_sums,
)
from .errors import BudgetExceededError, DomainError, InvalidStateError, PoleError
from .params import PhysicsParams

__all__ = [
    "FreeSector",
    "FiniteMatrices",
    "BruteForceResult",
    "tau",
    "chi",
    "wavefunction_phi",
    "norm_const_sq",
    "form_factor",
    "form_factor_bordered",
    "overlap",
    "norm_by_quadrature",
    "overlap_by_quadrature",
    "state_weight",
    "greens_bruteforce",
    "finite_E",
    "finite_E_raw",
    "finite_matrices",
    "xi_determinant",
    "xi_multisum",
]

DEFAULT_BUDGET = 2_000_000
_POLE_TOL = 1e-13


def tau(q, x: float, t: float):
    """Phase function tau(q) = t q**2 - x q."""
    q = np.asarray(q, dtype=np.float64)
    return t * q * q - x * q


@dataclass(frozen=True)
class FreeSector:
    """Eigenstate of N free up-spins with momenta q_j = 2 pi m_j / L."""

    params: PhysicsParams
    m_labels: tuple[int, ...]

    def __post_init__(self):
        if not self.params.is_finite:
            raise DomainError("a free sector needs a finite box")
        labels = tuple(sorted(int(v) for v in self.m_labels))
        if len(set(labels)) != len(labels):
            raise InvalidStateError(f"free momenta must be distinct, got {self.m_labels}")
        if len(labels) != self.params.N:
            raise InvalidStateError(f"need N={self.params.N} labels, got {len(labels)}")
        object.__setattr__(self, "m_labels", labels)

    @classmethod
    def ground_state(cls, params: PhysicsParams) -> "FreeSector":
        """Filled Fermi sea: |q| <= k_F for odd N, -k_F < q <= k_F for even N."""
        N = params.N
        lo = -(N - 1) // 2 if N % 2 else -N // 2 + 1
        return cls(params, tuple(range(lo, lo + N)))

    @property
    def q(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.m_labels, dtype=np.float64) / self.params.L

    @property
    def N(self) -> int:
        return self.params.N

    def swapped(self, i: int, j: int) -> np.ndarray:
        """The momenta with entries i and j exchanged (row swap in F_N)."""
        q = self.q.copy()
        q[[i, j]] = q[[j, i]]
        return q


@dataclass(frozen=True)
class FiniteMatrices:
    """S, R and G of the N x N determinant representation at one (x, t, lambda, s)."""

    S: np.ndarray
    R: np.ndarray
    G_scalar: complex
    s: float

    @property
    def V(self) -> np.ndarray:
        return self.S - np.eye(self.S.shape[0])

    def xi(self) -> complex:
        return complex(np.linalg.det(self.S - self.R) + (self.G_scalar - 1.0) * np.linalg.det(self.S))


# ------------------------------------------------------------ wave functions


def chi(l: int, y, state: ImpurityState):
    """Plane-wave building block chi_l(y) on [-L, L], with sgn(0) = +1.

    At the lambda = -inf state every chi_l carries the divergent factor
    -2 (k_l - lambda) / c; there the limit of chi_l c / (2 |lambda|), namely
    -e^{i k_l y}, is returned.
    """
    L = state.params.L
    y = np.asarray(y, dtype=np.float64)
    if np.any(np.abs(y) > L * (1 + 1e-14)):
        raise DomainError("chi is defined on [-L, L]")
    k = state.k[l]
    if state.at_minus_infinity:
        return -np.exp(1j * k * y)
    sgn = np.where(y >= 0.0, 1.0, -1.0)
    c = state.params.c
    return -(2.0 / c) * (k - state.lam - 0.5j * c * sgn) * np.exp(1j * k * y)


def _sum_prod_u(u: np.ndarray) -> float:
    """sum_l prod_{j != l} u_j, evaluated as prod(u) * sum(1/u)."""
    return float(np.prod(u) * np.sum(1.0 / u))


def norm_const_sq(state: ImpurityState) -> float:
    """|C|**2 such that the impurity state has unit norm.

    At lambda = -inf the constant of the rescaled wave function (chi -> -e^{iky})
    is returned, i.e. the free-fermion value 1 / ((N!)**2 L**(N+1) (N+1)).
    """
    N = len(state.k) - 1
    L = state.params.L
    pref = 1.0 / (math.factorial(N) ** 2 * L ** (N + 1))
    if state.at_minus_infinity:
        return pref / (N + 1)
    return pref / _sum_prod_u(state.u)


def wavefunction_phi(y, state: ImpurityState) -> complex:
    """Phi_N(y_1..y_N) on [0, L]^N as C times the bordered determinant."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    N = len(state.k) - 1
    if y.shape != (N,):
        raise DomainError(f"need {N} coordinates, got shape {y.shape}")
    if np.any(y < 0) or np.any(y > state.params.L):
        raise DomainError("coordinates must lie in [0, L]")
    mat = np.ones((N + 1, N + 1), dtype=np.complex128)
    for l in range(N + 1):
        mat[l, :N] = chi(l, y, state)
    return complex(math.sqrt(norm_const_sq(state)) * np.linalg.det(mat))


# ------------------------------------------------------------- form factors


def _pole_check(q: np.ndarray, k: np.ndarray):
    gap = np.abs(q[:, None] - k[None, :])
    if np.any(gap <= _POLE_TOL * (1.0 + np.abs(q[:, None]))):
        raise PoleError("a free momentum coincides with an impurity-sector momentum")


def form_factor(q, state: ImpurityState) -> float:
    """F_N = 2**N det[1/(q_j - k_l) - 1/(q_j - k_{N+1})] (real)."""
    q = np.asarray(q.q if isinstance(q, FreeSector) else q, dtype=np.float64)
    k = state.k
    _pole_check(q, k)
    mat = 1.0 / (q[:, None] - k[None, :-1]) - 1.0 / (q[:, None] - k[None, -1:])
    return float(2.0 ** len(q) * np.linalg.det(mat))


def form_factor_bordered(q, state: ImpurityState) -> float:
    """The same F_N from the (N+1) x (N+1) determinant with a row of ones."""
    q = np.asarray(q.q if isinstance(q, FreeSector) else q, dtype=np.float64)
    k = state.k
    _pole_check(q, k)
    N = len(q)
    mat = np.ones((N + 1, N + 1))
    mat[:N] = 1.0 / (q[:, None] - k[None, :])
    return float(2.0**N * np.linalg.det(mat))


def overlap(free: FreeSector, state: ImpurityState) -> float:
    """<free| psi_down(0) |state> = N! C F_N / L**(N/2), with C > 0.

    At lambda = -inf the limit is taken analytically: it is nonzero only when the
    impurity labels contain every free label.
    """
    N = free.N
    L = free.params.L
    if state.at_minus_infinity:
        labels = list(state.n_labels)
        if not set(free.m_labels) <= set(labels):
            return 0.0
        mat = np.ones((N + 1, N + 1))
        mat[:N] = 0.0
        for j, mj in enumerate(free.m_labels):
            mat[j, labels.index(mj)] = 1.0
        return float((-1) ** N * np.linalg.det(mat) / math.sqrt(L * (N + 1)))
    C = math.sqrt(norm_const_sq(state))
    return math.factorial(N) * C * form_factor(free, state) / L ** (N / 2)


def _gauss_legendre(L: float, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * L * (x + 1.0), 0.5 * L * w


def norm_by_quadrature(state: ImpurityState, nodes: int = 64) -> float:
    """N! L int_{[0,L]^N} |Phi_N|**2 by tensor Gauss-Legendre (N <= 2)."""
    N = len(state.k) - 1
    if N > 2:
        raise DomainError("quadrature oracle is limited to N <= 2")
    L = state.params.L
    y, w = _gauss_legendre(L, nodes)
    total = 0.0
    for idx in itertools.product(range(nodes), repeat=N):
        pt = y[list(idx)]
        total += np.prod(w[list(idx)]) * abs(wavefunction_phi(pt, state)) ** 2
    return float(math.factorial(N) * L * total)


def overlap_by_quadrature(free: FreeSector, state: ImpurityState, nodes: int = 64) -> complex:
    """N! int conj(Psi_free) Phi_N over [0, L]^N by tensor Gauss-Legendre (N <= 2)."""
    N = free.N
    if N > 2:
        raise DomainError("quadrature oracle is limited to N <= 2")
    L = free.params.L
    y, w = _gauss_legendre(L, nodes)
    q = free.q
    total = 0j
    for idx in itertools.product(range(nodes), repeat=N):
        pt = y[list(idx)]
        psi = np.linalg.det(np.exp(1j * q[:, None] * pt[None, :])) / (math.factorial(N) * L ** (N / 2))
        total += np.prod(w[list(idx)]) * np.conj(psi) * wavefunction_phi(pt, state)
    return complex(math.factorial(N) * total)


# --------------------------------------------------------- spectral sum


def state_weight(free: FreeSector, state: ImpurityState, x: float, t: float) -> complex:
    """One term of the spectral sum: |overlap|**2 times the phase."""
    phase = np.exp(1j * (np.sum(tau(free.q, x, t)) - np.sum(tau(state.k, x, t))))
    return complex(overlap(free, state) ** 2 * phase)


@dataclass(frozen=True)
class BruteForceResult:
    """Partial spectral sum; ``shells[r]`` collects the terms whose largest |label| is r."""

    value: complex
    tail_estimate: float
    n_states: int
    shells: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128), repr=False)

    def partial_sums(self, start: int = 0) -> np.ndarray:
        """Partial sums for cutoffs start..n_cutoff."""
        return np.cumsum(self.shells)[start:]

    def cesaro(self, start: int) -> complex:
        """Mean of the partial sums from cutoff ``start`` on.

        The spectral sum converges only in this averaged sense: its phases
        e^{-i tau(k)} make the partial sums oscillate without decaying.
        """
        return complex(np.mean(self.partial_sums(start)))


def _label_sets(n_cutoff: int, n1: int) -> np.ndarray:
    window = range(-n_cutoff, n_cutoff + 1)
    count = math.comb(2 * n_cutoff + 1, n1)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(window, n1)), dtype=np.int64, count=count * n1)
    return flat.reshape(count, n1)


def _finite_root_terms(labels2d, lams, q, x, t, params):
    """Spectral-sum terms for every (label set, finite root); shape (sets,)."""
    a, c, L = params.a, params.c, params.L
    N = q.size
    sets, n1 = labels2d.shape
    total = np.zeros(sets, dtype=np.complex128)
    for m in range(lams.shape[1]):
        shift = a * np.pi * labels2d - (2.0 * lams[:, m] / c)[:, None]
        y = _solve_frac(np.ascontiguousarray(shift.ravel()), a).reshape(shift.shape)
        k = (2.0 / L) * (np.pi * labels2d + y)
        inv_u = 1.0 / (1.0 / np.sin(y) ** 2 + a)
        gap = q[None, :, None] - k[:, None, :]
        if np.any(np.abs(gap) <= _POLE_TOL):
            raise PoleError("free and impurity momenta coincide")
        mat = 1.0 / gap[:, :, :-1] - 1.0 / gap[:, :, -1:]
        F = 2.0**N * np.linalg.det(mat)
        weight = np.prod(inv_u, axis=1) / np.sum(inv_u, axis=1) * F**2 / L ** (2 * N + 1)
        phase = np.exp(1j * (np.sum(tau(q, x, t)) - np.sum(tau(k, x, t), axis=1)))
        total += weight * phase
    return total


def greens_bruteforce(
    x: float,
    t: float | complex,
    free: FreeSector,
    n_cutoff: int,
    budget: int = DEFAULT_BUDGET,
    chunk: int = 50_000,
) -> BruteForceResult:
    """Partial spectral sum over impurity states with labels in [-n_cutoff, n_cutoff].

    Label sets are enumerated in increasing order, so no permutation factor
    appears. The tail estimate is the magnitude of the outermost shell, i.e. of
    all terms whose largest |label| equals ``n_cutoff`` (a heuristic).

    At real t != 0 the finite-box sum is a theta-function distribution and its
    partial sums never settle. A complex time t - i eps (eps > 0) multiplies each
    term by e^{-eps (sum k^2 - sum q^2)} and makes the sum absolutely convergent.
    """
    params = free.params
    N = free.N
    if n_cutoff < max(abs(m) for m in free.m_labels):
        raise DomainError("the label window must contain the free momenta")
    count = math.comb(2 * n_cutoff + 1, N + 1)
    if count > budget:
        raise BudgetExceededError(f"{count} label sets exceed the budget of {budget}")
    q = free.q
    labels_all = _label_sets(n_cutoff, N + 1)
    shells = np.zeros(n_cutoff + 1, dtype=np.complex128)
    for start in range(0, count, chunk):
        labels2d = labels_all[start : start + chunk]
        lams = find_lambda_roots_batch(labels2d, params)
        terms = _finite_root_terms(labels2d, lams, q, x, t, params)
        radius = np.max(np.abs(labels2d), axis=1)
        shells += np.bincount(radius, weights=terms.real, minlength=n_cutoff + 1)
        shells += 1j * np.bincount(radius, weights=terms.imag, minlength=n_cutoff + 1)

    # lambda = -inf states: k = q plus one extra free momentum p
    extra = np.array([p for p in range(-n_cutoff, n_cutoff + 1) if p not in free.m_labels])
    p = 2.0 * np.pi * extra / params.L
    m0 = np.exp(-1j * tau(p, x, t)) / ((N + 1) * params.L)
    shells += np.bincount(np.abs(extra), weights=m0.real, minlength=n_cutoff + 1)
    shells += 1j * np.bincount(np.abs(extra), weights=m0.imag, minlength=n_cutoff + 1)
    value = complex(math.fsum(shells.real), math.fsum(shells.imag))
    return BruteForceResult(value, float(abs(shells[-1])), int(count * (N + 1)), shells)


# ----------------------------------------------------- determinant representation


def _window_momenta(lam: float, params: PhysicsParams, cutoff: int):
    n = np.arange(-cutoff, cutoff + 1, dtype=np.float64)
    y = _frac_parts(n, lam, params.a, params.c)
    return n, y, (2.0 / params.L) * (np.pi * n + y)


def _phi(k, lam, x, t, params, s=0.0):
    k = np.asarray(k, dtype=np.float64)
    phase = -tau(k, x, t)
    if s:
        phase = phase + s * alpha_of(k, lam, params.c)
    return np.exp(1j * phase) / u_of(k, lam, params)


def finite_E_raw(q: float, lam: float, x: float, t: float, params: PhysicsParams, cutoff: int) -> complex:
    """(2/L) sum_k e^{-i tau(k)} / ((k - q) u(k)), truncated to |n| <= cutoff."""
    _, _, k = _window_momenta(lam, params, cutoff)
    d = k - q
    if np.any(np.abs(d) <= _POLE_TOL * (1.0 + abs(q))):
        raise PoleError("q coincides with a momentum k(lambda)")
    return complex((2.0 / params.L) * np.sum(_phi(k, lam, x, t, params) / d))


def finite_E(q: float, lam: float, x: float, t: float, params: PhysicsParams, cutoff: int) -> complex:
    """Regularised finite-volume E(q|lambda), well defined for every real q.

    The subtracted constant e^{-i tau(q)}/u(q) times sum 1/(k - q) is summed with
    the analytic window tail; the remaining oscillatory summand decays like 1/k**3
    and is truncated.
    """
    if not (math.isfinite(lam) and math.isfinite(q)):
        raise DomainError("finite_E needs finite q and lambda")
    L, c = params.L, params.c
    n, y, k = _window_momenta(lam, params, cutoff)
    phi_k = _phi(k, lam, x, t, params)
    phi_q = complex(_phi(q, lam, x, t, params))
    d = k - q
    near = np.abs(d) <= 1e-9 * (1.0 + abs(q))
    safe = np.where(near, 1.0, d)
    terms = (phi_k - phi_q) / safe
    if near.any():
        # removable singularity: the derivative of e^{-i tau}/u at q
        dtau = 2.0 * t * q - x
        du = 8.0 * (q - lam) / (c * c)
        terms[near] = phi_q * (-1j * dtau - du / float(u_of(q, lam, params)))
    body = (2.0 / L) * np.sum(terms)
    t1, _ = window_tail_sums(L * q / 2.0, lam, params, cutoff)
    # (2/L) sum_{tail} 1/(k - q) = t1 since k - q = 2 (z - z0) / L
    body -= phi_q * t1
    return complex(body + 2.0 * (q - lam) * phi_q / c)


def _sums_for_matrices(q, k, lam, x, t, params, s):
    d = k[None, :] - q[:, None]
    if np.any(np.abs(d) <= _POLE_TOL * (1.0 + np.abs(q[:, None]))):
        raise PoleError("a momentum in the k-set coincides with a free momentum")
    phi = _phi(k, lam, x, t, params, s)
    e1 = np.sum(phi[None, :] / d, axis=1)
    e2 = np.sum(phi[None, :] / (d * d), axis=1)
    g = np.sum(phi)
    return e1, e2, g


def finite_matrices(
    x: float,
    t: float,
    free: FreeSector,
    lam: float,
    s: float = 0.0,
    cutoff: int | None = None,
    momenta=None,
) -> FiniteMatrices:
    """S, R, G from k-sums over the label window |n| <= cutoff, or over ``momenta``.

    Off-diagonal S entries use the partial-fraction form (e1_j - e1_l)/(q_j - q_l),
    which is algebraically identical to the double-pole sum.
    """
    params = free.params
    L = params.L
    if not math.isfinite(lam):
        raise DomainError("finite_matrices needs a finite lambda")
    if momenta is None:
        if cutoff is None:
            cutoff = int(math.ceil(300.0 * L / (2.0 * np.pi)))
        _, _, k = _window_momenta(lam, params, cutoff)
    else:
        k = np.asarray(momenta, dtype=np.float64).ravel()
    q = free.q
    e1, e2, g = _sums_for_matrices(q, k, lam, x, t, params, s)
    half = np.exp(0.5j * tau(q, x, t))
    dq = q[:, None] - q[None, :]
    np.fill_diagonal(dq, 1.0)
    inner = (e1[:, None] - e1[None, :]) / dq
    np.fill_diagonal(inner, e2)
    outer = half[:, None] * half[None, :]
    S = (4.0 / L**2) * outer * inner
    R = (4.0 / L**3) * outer * np.outer(e1, e1)
    return FiniteMatrices(S=S, R=R, G_scalar=complex(g / L), s=float(s))


def xi_determinant(x, t, free: FreeSector, lam: float, s: float = 0.0, cutoff=None, momenta=None) -> complex:
    """det(S - R) + (G - 1) det S."""
    return finite_matrices(x, t, free, lam, s, cutoff=cutoff, momenta=momenta).xi()


def xi_multisum(x, t, free: FreeSector, lam: float, s: float, momenta) -> complex:
    """Explicit (N+1)-fold sum over ``momenta`` that the determinant form resums.

    Each of the N+1 momenta runs independently over the set; coinciding momenta
    drop out because F_N vanishes. The prefactor is 1/(N+1)!.
    """
    params = free.params
    L, c = params.L, params.c
    N = free.N
    q = free.q
    K = np.asarray(momenta, dtype=np.float64).ravel()
    if np.any(np.abs(q[:, None] - K[None, :]) <= _POLE_TOL * (1.0 + np.abs(q[:, None]))):
        raise PoleError("a momentum in the k-set coincides with a free momentum")
    idx = np.array(list(itertools.product(range(K.size), repeat=N + 1)), dtype=np.int64)
    k = K[idx]
    gap = q[None, :, None] - k[:, None, :]
    F = 2.0**N * np.linalg.det(1.0 / gap[:, :, :-1] - 1.0 / gap[:, :, -1:])
    inv_u = 1.0 / u_of(k, lam, params)
    alpha = alpha_of(k, lam, c)
    phase = np.sum(tau(q, x, t)) - np.sum(tau(k, x, t) - s * alpha, axis=1)
    terms = np.prod(inv_u, axis=1) * F**2 * np.exp(1j * phase)
    return complex(np.sum(terms) / (math.factorial(N + 1) * L ** (2 * N + 1)))
