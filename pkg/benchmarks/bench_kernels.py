"""Numba loop kernels vs numpy fallbacks on the hot paths.

Run with ``python3 benchmarks/bench_kernels.py``. Each line gives the best of
several repeats after one warm-up call (which pays the JIT compile).
"""
import argparse
import math
import timeit

import numpy as np

from impgreen.bethe import _roots_batch_loop, _roots_batch_numpy
from impgreen.faddeeva import _T_COEF, _W_COEF, _W_SCALE, _wofz_loop, _wofz_numpy
from impgreen.fredholm import gauss_legendre
from impgreen.kernels import NodeKernels, _assemble_v_loop, _assemble_v_numpy
from impgreen.linalg import backends
from impgreen.params import PhysicsParams


def best(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases(order):
    p = PhysicsParams.thermodynamic(2.0, 1.0)
    nodes, weights = gauss_legendre(1.0, order)
    nk = NodeKernels(1.0, 0.5, p, nodes, weights)
    _, _, e, de = nk.theta_data(1.1)
    vargs = (nk.nodes, nk.sqrt_w, nk.em, e, de, nk.delta)
    A = np.eye(order) + _assemble_v_numpy(*vargs)
    lu = backends()
    z = (np.random.default_rng(0).normal(size=20_000) * 5 + 1j * np.abs(np.random.default_rng(1).normal(size=20_000))).astype(np.complex128)
    pf = PhysicsParams.finite(2.0, 8.0 * math.pi, 8)
    rng = np.random.default_rng(2)
    labels = np.sort(np.array([rng.choice(np.arange(-20, 21), 9, replace=False) for _ in range(200)]), axis=1).astype(np.int64)
    return {
        f"assemble V (order {order})": (lambda: _assemble_v_loop(*vargs), lambda: _assemble_v_numpy(*vargs)),
        f"LU factor (order {order})": (lambda: lu["numba"][0](A.copy()), lambda: lu["numpy"][0](A.copy())),
        "wofz (20k points)": (lambda: _wofz_loop(z, _W_COEF, _W_SCALE, _T_COEF), lambda: _wofz_numpy(z)),
        "lambda roots (200 sets, N=8)": (
            lambda: _roots_batch_loop(labels, pf.a, pf.c, pf.L),
            lambda: _roots_batch_numpy(labels, pf.a, pf.c, pf.L),
        ),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':<32} {'numba [ms]':>11} {'numpy [ms]':>11} {'speed-up':>9}")
    for name, (fast, slow) in cases(args.order).items():
        a, b = best(fast, args.repeat), best(slow, args.repeat)
        print(f"{name:<32} {1e3 * a:>11.3f} {1e3 * b:>11.3f} {b / a:>8.1f}x")


if __name__ == "__main__":
    main()
