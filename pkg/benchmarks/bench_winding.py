"""Benchmark the loop kernels under both backends.

Times winding-number evaluation (phase scan + symbol grid + batched
determinants) for a batch of random matrix symbols, once per backend,
and prints a comparison table.  The first numba call includes JIT
compilation; a warmup pass keeps it out of the timing.

Usage: python benchmarks/bench_winding.py [--count 200] [--channels 3]
       [--degree 3] [--repeats 3]
"""

import argparse
import os
import time

import numpy as np


def make_symbols(count, channels, degree, seed):
    from fredcorr.circles import random_laurent_symbol
    rng = np.random.default_rng(seed)
    return [random_laurent_symbol(rng, channels=channels, degree=degree)
            for _ in range(count)]


def time_backend(name, syms, repeats):
    from fredcorr.circles import winding_number
    os.environ["FREDCORR_BACKEND"] = name
    # warmup (JIT compile for numba, cache touch for numpy)
    winding_number(syms[0])
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = [winding_number(s) for s in syms]
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--channels", type=int, default=3)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    from fredcorr._kernels import HAS_NUMBA

    syms = make_symbols(args.count, args.channels, args.degree, args.seed)
    t_np, w_np = time_backend("numpy", syms, args.repeats)
    rows = [("numpy", t_np, 1.0)]
    if HAS_NUMBA:
        t_nb, w_nb = time_backend("numba", syms, args.repeats)
        assert w_np == w_nb, "backends disagree on winding numbers"
        rows.append(("numba", t_nb, t_np / t_nb))
    else:
        print("numba not installed; timing numpy only")

    print(f"{args.count} symbols, {args.channels} channels, degree {args.degree}")
    print(f"{'backend':<8} {'best (s)':>10} {'speedup':>8}")
    for name, t, speed in rows:
        print(f"{name:<8} {t:>10.4f} {speed:>7.2f}x")


if __name__ == "__main__":
    main()
