"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs the two hot kernels on a few representative shapes and prints the
best-of-N wall time per backend. Usage:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from relmetric._kernels import pure

try:
    from relmetric._kernels import _native as native
except ImportError:
    native = None


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_cross(backend, X, Y, M, repeats):
    return best_of(repeats, lambda: backend.mahalanobis_cross(X, Y, M))


def bench_sweep(backend, X, ci, cj, delta, u, l, repeats):
    n_c = len(ci)
    A0 = np.eye(X.shape[1])
    bhat0 = np.where(delta == 1, u, l).astype(np.float64)
    A = A0.copy()
    bhat = bhat0.copy()
    lambdas = np.zeros(n_c)

    def run():
        A[:] = A0
        bhat[:] = bhat0
        lambdas[:] = 0.0
        backend.itml_sweep(A, X, ci, cj, delta, bhat, lambdas, 1.0, 0.5)

    return best_of(repeats, run)


def fmt(seconds):
    return f"{seconds * 1e3:9.3f} ms"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    backends = [("pure", pure)] + ([("native", native)] if native else [])
    if native is None:
        print("compiled backend not importable; timing the fallback only")

    print(f"{'kernel':<42} " + " ".join(f"{name:>12}" for name, _ in backends)
          + ("      speedup" if native else ""))

    for n, m, d in ((400, 400, 30), (1200, 300, 10)):
        X = rng.normal(size=(n, d))
        Y = rng.normal(size=(m, d))
        A = rng.normal(size=(d, d))
        M = A @ A.T
        times = [bench_cross(b, X, Y, M, args.repeats) for _, b in backends]
        row = f"mahalanobis_cross  n={n:<5} m={m:<5} d={d:<3}"
        line = f"{row:<42} " + " ".join(fmt(t) for t in times)
        if len(times) == 2:
            line += f"   {times[0] / times[1]:8.1f}x"
        print(line)

    for n, d, n_c in ((300, 20, 400), (600, 40, 1000)):
        X = rng.normal(size=(n, d))
        ci = rng.integers(0, n, size=n_c)
        cj = (ci + 1 + rng.integers(0, n - 1, size=n_c)) % n
        delta = np.where(rng.random(n_c) < 0.5, 1, -1).astype(np.int64)
        times = [
            bench_sweep(b, X, ci, cj, delta, 0.5, 4.0, args.repeats)
            for _, b in backends
        ]
        row = f"itml_sweep         n={n:<5} d={d:<3} c={n_c:<5}"
        line = f"{row:<42} " + " ".join(fmt(t) for t in times)
        if len(times) == 2:
            line += f"   {times[0] / times[1]:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
