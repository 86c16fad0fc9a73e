#!/usr/bin/env python3
"""Benchmark the hot kernels under both backends.

Runs the latent-spin/record recurrence and the OU path generator on a
representative Monte-Carlo batch with the jitted kernels (when numba is
importable) and the pure-numpy fallback, and prints the timing ratio.

    python benchmarks/bench_kernels.py [--rows N] [--cols N] [--repeat K]
"""
import argparse
import time

import numpy as np

from spintrack import _kernels as k


def _time(fn, args, repeat):
    fn(*args)  # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=4096)
    parser.add_argument("--cols", type=int, default=512)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    m, d = args.rows, args.cols
    g = np.random.default_rng(0)
    b = g.normal(size=(m, d))
    zs, zb, zy = g.normal(size=(3, m, d))
    p0 = g.normal(size=m)
    spin_args = (b, zs, zb, zy, p0, 0.0069, 0.01, 0.0143, 0.0, 0.2739, np.sqrt(0.5))
    ou_args = (g.normal(size=(m, d)), g.normal(size=m), 0.98, 0.31)

    rows = []
    t_np = _time(k._spin_record_numpy, spin_args, args.repeat)
    rows.append(("spin_record", "numpy", t_np, 1.0))
    if k.USE_NUMBA:
        t_jit = _time(k._spin_record_jit, spin_args, args.repeat)
        rows.append(("spin_record", "numba", t_jit, t_np / t_jit))
    t_np = _time(k._ou_paths_numpy, ou_args, args.repeat)
    rows.append(("ou_paths", "numpy", t_np, 1.0))
    if k.USE_NUMBA:
        t_jit = _time(k._ou_paths_jit, ou_args, args.repeat)
        rows.append(("ou_paths", "numba", t_jit, t_np / t_jit))

    print(f"batch {m} x {d}, best of {args.repeat}")
    print(f"{'kernel':<14}{'backend':<10}{'seconds':>12}{'speedup':>10}")
    for name, backend, seconds, speedup in rows:
        print(f"{name:<14}{backend:<10}{seconds:>12.4f}{speedup:>10.2f}")
    if not k.USE_NUMBA:
        print("numba backend unavailable or disabled (SPINTRACK_NUMBA=0)")


if __name__ == "__main__":
    main()
