#!/usr/bin/env python3
"""Benchmark the compiled distance kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [n_structures]
"""

import sys
import time

import numpy as np

from symadit import _kernels_py
from symadit import kernels
from symadit.crystal import lattice_matrix


def bench(fn, args_list, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 400
    rng = np.random.default_rng(0)
    cases = []
    for _ in range(n):
        ell = np.empty(6)
        ell[:3] = rng.uniform(3, 9, 3)
        ell[3:] = rng.uniform(75, 105, 3)
        try:
            lattice, _ = lattice_matrix(ell)
        except ValueError:
            continue
        m = int(rng.integers(4, 40))
        cases.append((rng.uniform(0, 1, (m, 3)), lattice))

    pair_cases = [(a[0][: len(a[0]) // 2 + 1], a[0], a[1]) for a in cases]

    print(f"kernel backend in use: {kernels.backend()}")
    print(f"{len(cases)} structures, 4-40 atoms each\n")

    for name, py_fn, fast_fn, args in (
        ("min_pairwise_distance", _kernels_py.min_pairwise_distance,
         kernels.min_pairwise_distance, cases),
        ("min_image_distance_matrix", _kernels_py.min_image_distance_matrix,
         kernels.min_image_distance_matrix, pair_cases),
    ):
        t_py = bench(py_fn, args)
        # correctness cross-check before timing the fast path
        for a in args[:20]:
            ref = np.asarray(py_fn(*a))
            got = np.asarray(fast_fn(*a))
            assert np.allclose(ref, got, rtol=1e-12), name
        t_fast = bench(fast_fn, args)
        print(f"{name:28s} numpy {t_py * 1e3:8.1f} ms   "
              f"{kernels.backend():8s} {t_fast * 1e3:8.1f} ms   "
              f"speedup {t_py / t_fast:5.1f}x")


if __name__ == "__main__":
    main()
