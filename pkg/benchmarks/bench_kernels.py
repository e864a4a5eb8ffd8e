#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy fallback.

Runs the two hot kernels (cyclic Jacobi eigendecomposition and PAM
BUILD+SWAP) at pipeline-realistic sizes and prints a timing table. The
compiled backend must be built (pip install -e .); the fallback is always
importable.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from taskrisk.kernels import _pykernels

try:
    from taskrisk.kernels import _ckernels
except ImportError:
    _ckernels = None


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_jacobi(backend, p, repeat):
    rng = np.random.default_rng(1)
    m = rng.standard_normal((p, p))
    a = (m + m.T) / 2.0
    return time_call(lambda: backend.jacobi_eigh(a), repeat)


def bench_pam(backend, n, k, repeat):
    rng = np.random.default_rng(2)
    pts = rng.standard_normal((n, 7))
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)

    def run():
        medoids = backend.pam_build(d, k)
        backend.pam_swap(d, medoids)

    return time_call(run, repeat)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cases = [
        ("jacobi_eigh p=45", lambda b: bench_jacobi(b, 45, args.repeat)),
        ("jacobi_eigh p=100", lambda b: bench_jacobi(b, 100, args.repeat)),
        ("pam n=500 k=7", lambda b: bench_pam(b, 500, 7, args.repeat)),
        ("pam n=966 k=7", lambda b: bench_pam(b, 966, 7, args.repeat)),
    ]
    print(f"{'kernel':<20} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name, runner in cases:
        py = runner(_pykernels)
        if _ckernels is None:
            print(f"{name:<20} {py * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        cy = runner(_ckernels)
        print(f"{name:<20} {py * 1e3:>10.2f}ms {cy * 1e3:>10.2f}ms {py / cy:>8.1f}x")


if __name__ == "__main__":
    main()
