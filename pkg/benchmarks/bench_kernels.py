#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run with the package installed:

    python benchmarks/bench_kernels.py

The comparison covers the two genuinely loop-bound kernels: the
capped-simplex boundary-weight solver and the amplitude activations
(forward + backward). Matrix products are BLAS-bound in both backends and
are not benchmarked here.
"""

import time

import numpy as np

from fsvdd._backend import NUMBA_ENABLED
from fsvdd import _kernels


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up / jit compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_smo(n=318, dim=64, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    d2 = np.maximum(
        (X * X).sum(1)[:, None] + (X * X).sum(1)[None, :] - 2 * X @ X.T, 0.0)
    K = np.exp(-d2 / np.median(d2))
    args = (K, 1.0, 1e-10, 200_000)
    rows = [("smo numpy", timeit(_kernels._smo_solve_np, *args))]
    if NUMBA_ENABLED:
        rows.append(("smo numba", timeit(_kernels._smo_solve_nb, *args)))
    return rows


def bench_activations(batch=318, nodes=1501, seed=1):
    rng = np.random.default_rng(seed)
    z = np.ascontiguousarray(rng.standard_normal((batch, nodes))
                             + 1j * rng.standard_normal((batch, nodes)))
    g = np.ascontiguousarray(rng.standard_normal((batch, nodes))
                             + 1j * rng.standard_normal((batch, nodes)))
    b = np.ascontiguousarray(rng.uniform(0.3, 1.2, nodes))
    rows = []
    _, r, e = _kernels._ead_fwd_np(z, b)
    rows.append(("ead fwd numpy", timeit(_kernels._ead_fwd_np, z, b)))
    rows.append(("ead bwd numpy", timeit(_kernels._ead_bwd_np, g, z, r, e, b)))
    rows.append(("modrelu fwd numpy", timeit(_kernels._modrelu_fwd_np, z, b)))
    rows.append(("modrelu bwd numpy",
                 timeit(_kernels._modrelu_bwd_np, g, z, r, b)))
    if NUMBA_ENABLED:
        rows.append(("ead fwd numba", timeit(_kernels._ead_fwd_nb, z, b)))
        rows.append(("ead bwd numba",
                     timeit(_kernels._ead_bwd_nb, g, z, r, e, b)))
        rows.append(("modrelu fwd numba",
                     timeit(_kernels._modrelu_fwd_nb, z, b)))
        rows.append(("modrelu bwd numba",
                     timeit(_kernels._modrelu_bwd_nb, g, z, r, b)))
    return rows


def main():
    print(f"numba backend available: {NUMBA_ENABLED}")
    if not NUMBA_ENABLED:
        print("(set FSVDD_NUMBA=1 or install numba for the comparison)")
    print(f"{'kernel':<22}{'best time':>12}")
    for name, t in bench_smo() + bench_activations():
        print(f"{name:<22}{t * 1e3:>10.2f} ms")


if __name__ == "__main__":
    main()
