#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from avmc._backend import get_kernels


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    try:
        compiled = get_kernels("compiled")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1
    python = get_kernels("python")

    rng = np.random.default_rng(0)
    t_steps = 2000
    rows = rng.integers(0, 5, size=t_steps)
    cols = rng.integers(0, 5, size=t_steps)
    eps = rng.normal(size=t_steps)

    counts = np.zeros((5, 5))
    ysums = np.zeros((5, 5))
    target = np.tile(rng.uniform(0, 10, 5), (5, 1))
    responses = target[rows, cols] + eps
    np.add.at(counts, (rows, cols), 1.0)
    np.add.at(ysums, (rows, cols), responses)

    mats = [rng.normal(size=(12, 9)) for _ in range(200)]

    cases = {
        f"opnorm scan ({t_steps} steps, 5x5)":
            lambda k: k.cumulative_opnorm_scan(rows, cols, eps, 5, 5),
        "violation scan (threshold never hit)":
            lambda k: k.martingale_violation_elementary(rows, cols, eps, 5, 5,
                                                        1e9, float(t_steps)),
        "prox-gradient fit (5x5, cold start)":
            lambda k: k.prox_grad_fit(counts, ysums, float(t_steps), 0, 1.0,
                                      0.2, 10.0, 1.0, 500, 1e-8, 1e-7,
                                      np.zeros((5, 5))),
        "svd (200 x 12x9)":
            lambda k: [k.svd(m) for m in mats],
    }

    width = max(len(name) for name in cases)
    print(f"{'kernel':<{width}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}")
    for name, fn in cases.items():
        tc = _time(lambda: fn(compiled), args.repeats)
        tp = _time(lambda: fn(python), args.repeats)
        print(f"{name:<{width}}  {tc * 1e3:>8.2f}ms  {tp * 1e3:>8.2f}ms  {tp / tc:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
