"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs the three hot kernels on synthetic batches and prints a table of
best-of-N timings for each backend, plus the speedup.  Imports both
implementations directly, bypassing the dispatcher, so the comparison
stays honest even when one backend would normally be preferred.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 1000,10000,100000]
                                        [--repeats 5] [--seed 0]
"""

import argparse
import time

import numpy as np

from cevarep import _kernels_py

try:
    from cevarep import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def make_problem(rng, k, n=3, m=2):
    A = rng.normal(size=(m, n))
    a = rng.normal(size=m)
    B = rng.normal(scale=0.1, size=n)
    X = rng.uniform(-1, 1, size=(k, n))
    P = rng.normal(size=(k, m))
    Q = rng.normal(size=(k, m))
    T = rng.uniform(0.05, 0.95, size=k)
    M = T[:, None] * P + (1.0 - T)[:, None] * Q
    return A, a, B, X, P, Q, M


def workloads(impl, problem):
    A, a, B, X, P, Q, M = problem

    def run_eval_many():
        impl.eval_many(A, a, B, 2.0, X)

    def run_chord_stats():
        impl.chord_stats(P, Q, M)

    def run_seg_coord():
        for i in range(0, len(P), max(1, len(P) // 256)):
            impl.seg_coord_one(P[i], Q[i], M[i])

    return (("eval_many", run_eval_many),
            ("chord_stats", run_chord_stats),
            ("seg_coord_one", run_seg_coord))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1000,10000,100000",
                        help="comma-separated batch sizes")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels is None:
        print("compiled extension not available; timing the fallback only")
    header = f"{'kernel':<14} {'batch':>8} {'python':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(args.seed)
    for k in sizes:
        problem = make_problem(rng, k)
        for name, py_fn in workloads(_kernels_py, problem):
            t_py = best_of(py_fn, args.repeats)
            if _kernels is None:
                print(f"{name:<14} {k:>8} {t_py * 1e3:>10.3f}ms {'-':>12} {'-':>8}")
                continue
            c_fn = dict(workloads(_kernels, problem))[name]
            t_c = best_of(c_fn, args.repeats)
            ratio = t_py / t_c if t_c > 0 else float("inf")
            print(f"{name:<14} {k:>8} {t_py * 1e3:>10.3f}ms "
                  f"{t_c * 1e3:>10.3f}ms {ratio:>7.2f}x")


if __name__ == "__main__":
    main()
