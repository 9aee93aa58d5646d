"""Self-checks that tie every numerical layer to an independent oracle.

Each suite returns a :class:`SuiteResult` holding one or more :class:`Check`
records (measured error vs threshold). The CLI ``validate`` command and the
acceptance tests both run these.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bethe import appendix_sums, appendix_sums_truncated, impurity_states
from .finite import (
    FreeSector,
    finite_matrices,
    form_factor,
    form_factor_bordered,
    norm_by_quadrature,
    overlap,
    overlap_by_quadrature,
    xi_determinant,
    xi_multisum,
)
from .fredholm import gauss_legendre
from .greens import equal_time_residual, greens, greens_infinite_c
from .kernels import KernelContext, NodeKernels, e_equal_time, e_q, g_equal_time, g_lambda
from .oscillatory import pole_integral_array, pole_integral_oracle
from .params import PhysicsParams

__all__ = ["Check", "SuiteResult", "SUITES", "DEFAULT_THRESHOLDS", "run_suite", "run_suites"]


@dataclass(frozen=True)
class Check:
    label: str
    measured: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.measured < self.threshold)


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)


DEFAULT_THRESHOLDS = {
    "appendix-sums": 1e-6,
    "norm-oracle.N1": 1e-8,
    "norm-oracle.N2": 1e-6,
    "formfactor-oracle.overlap": 1e-7,
    "formfactor-oracle.bordered": 1e-12,
    "insertion-identity": 1e-11,
    "osc-primitives": 1e-9,
    "equal-time.residual": 1e-6,
    "equal-time.closed-form": 1e-8,
    "infinite-c-limit": 1e-3,
    "finite-N-bridge": 1e-2,
}


def _rel(a, b) -> float:
    return float(abs(a - b) / max(abs(b), 1e-300))


def _appendix(rng, th):
    p = PhysicsParams.finite(2.0, 10.0, 3)
    worst = 0.0
    for _ in range(20):
        q = 2.0 * math.pi * int(rng.integers(-5, 6)) / p.L
        lam = float(rng.uniform(-3.0, 3.0))
        s1, s2 = appendix_sums(q, lam, p)
        t1, t2 = appendix_sums_truncated(q, lam, p, 10_000)
        worst = max(worst, abs(t1 - s1), abs(t2 - s2) / max(1.0, abs(s2)))
    return [Check("sum identities, cutoff 1e4", worst, th["appendix-sums"])]


def _norm(rng, th):
    out = []
    for N, key in ((1, "norm-oracle.N1"), (2, "norm-oracle.N2")):
        p = PhysicsParams.finite(2.0, 5.0, N)
        worst = 0.0
        for _ in range(2):
            labels = np.sort(rng.choice(np.arange(-3, 4), N + 1, replace=False))
            for s in impurity_states(labels, p):
                if not s.at_minus_infinity:
                    worst = max(worst, abs(norm_by_quadrature(s, 48) - 1.0))
        out.append(Check(f"unit norm, N={N}", worst, th[key]))
    return out


def _formfactor(rng, th):
    p1 = PhysicsParams.finite(2.0, 5.0, 1)
    free1 = FreeSector.ground_state(p1)
    worst_ov = 0.0
    for labels in ((0, 1), (-1, 2), (0, 3)):
        for s in impurity_states(labels, p1):
            worst_ov = max(worst_ov, abs(overlap(free1, s) - overlap_by_quadrature(free1, s, 64)))
    worst_b = 0.0
    for N in (1, 2, 3):
        p = PhysicsParams.finite(2.0, 3.0 * N, N)
        free = FreeSector.ground_state(p)
        for _ in range(3):
            labels = np.sort(rng.choice(np.arange(-6, 7), N + 1, replace=False))
            for s in impurity_states(labels, p):
                if s.at_minus_infinity:
                    continue
                ref = form_factor_bordered(free, s)
                worst_b = max(worst_b, abs(form_factor(free, s) - ref) / max(1.0, abs(ref)))
    return [
        Check("overlap vs direct integral, N=1", worst_ov, th["formfactor-oracle.overlap"]),
        Check("N x N vs bordered determinant, N<=3", worst_b, th["formfactor-oracle.bordered"]),
    ]


def _insertion(rng, th):
    worst = 0.0
    for trial in range(20):
        N = 1 + trial % 3
        p = PhysicsParams.finite(2.0, 4.0 + N, N)
        free = FreeSector.ground_state(p)
        size = int(rng.integers(N + 1, 8))
        momenta = rng.uniform(-4.0, 4.0, size)
        x, t = float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1))
        lam, s = float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1))
        worst = max(worst, _rel(xi_multisum(x, t, free, lam, s, momenta), xi_determinant(x, t, free, lam, s, momenta=momenta)))
    return [Check("multisum vs determinant, 20 trials", worst, th["insertion-identity"])]


def _osc(rng, th):
    worst = 0.0
    variants = ("complex-pole", "principal-value", "derivative", "pv-derivative")
    for i in range(200):
        variant = variants[i % 4]
        t = float(rng.uniform(0.05, 10.0)) * (1 if rng.random() < 0.5 else -1)
        x = float(rng.uniform(-5.0, 5.0))
        a = complex(rng.uniform(-3, 3), 0.0 if "principal" in variant or "pv" in variant else rng.uniform(-2, 2))
        val = complex(pole_integral_array(np.array([a]), x, t, variant)[0])
        worst = max(worst, _rel(val, pole_integral_oracle(a, x, t, variant)))
    return [Check("Faddeeva closed forms vs rotated contour, 200 points", worst, th["osc-primitives"])]


def _equal_time(rng, th):
    p = PhysicsParams.thermodynamic(2.0, 1.0)
    worst = max(abs(equal_time_residual(x, p)[0]) for x in (0.25, 0.5, 1.0, 2.0))
    worst_cf = 0.0
    q = np.linspace(-1.0, 1.0, 7)
    for x in (0.5, 1.0, -1.3):
        for lam in (-1.0, 0.0, 0.7):
            ctx = KernelContext(x, 0.0, lam, p)
            worst_cf = max(worst_cf, abs(complex(g_lambda(ctx)) - complex(g_equal_time(x, lam, p.c))))
            worst_cf = max(worst_cf, float(np.max(np.abs(e_q(q, ctx) - e_equal_time(q, x, lam, p.c)))))
    return [
        Check("|G(x,0)| for x in {0.25,0.5,1,2}", worst, th["equal-time.residual"]),
        Check("t=0 closed forms via generic pipeline", worst_cf, th["equal-time.closed-form"]),
    ]


def _infinite_c(rng, th):
    worst = 0.0
    monotone = True
    for x, t in ((1.0, 0.5), (0.5, 1.0)):
        ginf = greens_infinite_c(x, t, 1.0, tol=1e-9).value
        errs = [_rel(greens(x, t, PhysicsParams.thermodynamic(c, 1.0), tol=1e-9).value, ginf) for c in (1e2, 1e3, 1e4)]
        monotone &= errs[0] > errs[1] > errs[2]
        worst = max(worst, errs[-1])
    return [
        Check("|G_c - G_inf|/|G_inf| at c=1e4", worst, th["infinite-c-limit"]),
        Check("decrease over c = 1e2, 1e3, 1e4 (0 = monotone)", 0.0 if monotone else 1.0, 0.5),
    ]


def bridge_differences(x=1.0, t=0.5, c=2.0, k_F=1.0, Ns=(16, 32, 64), order=64):
    """Relative gap between det(S) of the finite system and det(1 + V) at lambda = 0."""
    pt = PhysicsParams.thermodynamic(c, k_F)
    nodes, weights = gauss_legendre(k_F, order)
    _, M, _ = NodeKernels(x, t, pt, nodes, weights).matrices(0.5 * math.pi)
    ref = np.linalg.det(np.eye(order) + M)
    diffs = []
    for N in Ns:
        p = PhysicsParams.finite(c, math.pi * N / k_F, N)
        S = finite_matrices(x, t, FreeSector.ground_state(p), 0.0).S
        diffs.append(_rel(np.linalg.det(S), ref))
    return diffs


def _bridge(rng, th):
    diffs = bridge_differences()
    decreasing = all(a > b for a, b in zip(diffs, diffs[1:]))
    return [
        Check("det gap at N=64", diffs[-1], th["finite-N-bridge"]),
        Check("gap decreasing over N = 16, 32, 64 (0 = yes)", 0.0 if decreasing else 1.0, 0.5),
    ]


SUITES = {
    "appendix-sums": _appendix,
    "norm-oracle": _norm,
    "formfactor-oracle": _formfactor,
    "insertion-identity": _insertion,
    "osc-primitives": _osc,
    "equal-time": _equal_time,
    "infinite-c-limit": _infinite_c,
    "finite-N-bridge": _bridge,
}


def run_suite(name: str, seed: int = 0, thresholds: dict | None = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    checks = SUITES[name](rng, th)
    return SuiteResult(name, checks, time.perf_counter() - t0)


def run_suites(names=None, seed: int = 0, thresholds: dict | None = None) -> list[SuiteResult]:
    return [run_suite(n, seed, thresholds) for n in (names or list(SUITES))]
