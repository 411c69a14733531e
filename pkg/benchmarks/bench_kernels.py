"""Numba kernels vs the numpy fallback for pairwise distances and MMD kernel sums.

Run: python benchmarks/bench_kernels.py --sizes 256,1024,2048 --features 20 --repeats 5
"""
import argparse
import time

import numpy as np

from cpdpgan import _kernels


def best_of(func, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times) * 1000.0


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--sizes", default="256,1024,2048")
    p.add_argument("--features", type=int, default=20)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba is not installed; nothing to compare")
        return

    rng = np.random.default_rng(0)
    gamma = 0.5 / args.features
    # compile once outside the timings
    warm = rng.normal(size=(8, args.features))
    _kernels.pdist_numba(warm)
    _kernels.gaussian_kernel_sum_numba(warm, warm, gamma, True)

    print(f"{'kernel':<12}{'n':>7}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        a = rng.normal(size=(n, args.features))
        b = rng.normal(0.5, 1.0, size=(n, args.features))
        cases = [
            ("pdist", lambda: _kernels.pdist_numpy(a), lambda: _kernels.pdist_numba(a)),
            ("kernel_sum", lambda: _kernels.gaussian_kernel_sum_numpy(a, b, gamma),
             lambda: _kernels.gaussian_kernel_sum_numba(a, b, gamma)),
        ]
        for name, ref, fast in cases:
            t_np, t_nb = best_of(ref, args.repeats), best_of(fast, args.repeats)
            print(f"{name:<12}{n:>7}{t_np:>12.2f}{t_nb:>12.2f}{t_np / max(t_nb, 1e-9):>9.1f}x")


if __name__ == "__main__":
    main()
