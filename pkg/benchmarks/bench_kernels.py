#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run as `python benchmarks/bench_kernels.py`. Each kernel is timed on a few
realistic shapes after a warmup call (the warmup also pays the JIT
compilation cost, which is reported separately).
"""

from __future__ import annotations

import time

import numpy as np

from clintriage import kernels

REPEATS = 30


def timeit(fn, *args) -> float:
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3  # ms


def mcd_inputs(passes, text_h, vit_in, vit_h, n_classes, rng):
    return (
        rng.normal(size=text_h), rng.random(vit_in),
        rng.normal(size=(vit_in, vit_h)), rng.normal(size=vit_h),
        rng.normal(size=(vit_h, text_h)), rng.normal(size=text_h),
        rng.normal(size=(text_h, n_classes)), rng.normal(size=n_classes),
        (rng.random((passes, vit_h)) >= 0.1) / 0.9,
        (rng.random((passes, text_h)) >= 0.1) / 0.9,
    )


def main() -> int:
    if not kernels.NUMBA_AVAILABLE:
        print("numba unavailable; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    rows = []

    cases = {
        "mcd_forward": {
            "numba": kernels._mcd_forward_numba,
            "numpy": kernels._mcd_forward_numpy,
            "shapes": {
                "T=30 trunk=256 C=24": mcd_inputs(30, 256, 10, 32, 24, rng),
                "T=100 trunk=256 C=24": mcd_inputs(100, 256, 10, 32, 24, rng),
                "T=30 trunk=64 C=4": mcd_inputs(30, 64, 10, 16, 4, rng),
            },
        },
        "dot_scores": {
            "numba": kernels._dot_scores_numba,
            "numpy": kernels._dot_scores_numpy,
            "shapes": {
                "n=1000 d=1024": (rng.normal(size=(1000, 1024)), rng.normal(size=1024)),
                "n=10000 d=1024": (rng.normal(size=(10000, 1024)), rng.normal(size=1024)),
                "n=614 d=256": (rng.normal(size=(614, 256)), rng.normal(size=256)),
            },
        },
        "pairwise_sq_dists": {
            "numba": kernels._pairwise_sq_dists_numba,
            "numpy": kernels._pairwise_sq_dists_numpy,
            "shapes": {
                "n=50 d=1034": (rng.normal(size=(50, 1034)),),
                "n=200 d=256": (rng.normal(size=(200, 256)),),
            },
        },
    }

    for kernel_name, spec in cases.items():
        for shape_name, args in spec["shapes"].items():
            args = tuple(np.ascontiguousarray(a) for a in args)
            t0 = time.perf_counter()
            spec["numba"](*args)  # warmup / compile
            compile_ms = (time.perf_counter() - t0) * 1e3
            spec["numpy"](*args)
            numba_ms = timeit(spec["numba"], *args)
            numpy_ms = timeit(spec["numpy"], *args)
            check_a = np.asarray(spec["numba"](*args))
            check_b = np.asarray(spec["numpy"](*args))
            assert np.allclose(check_a, check_b, atol=1e-9), kernel_name
            rows.append((kernel_name, shape_name, numba_ms, numpy_ms, compile_ms))

    width = max(len(r[1]) for r in rows)
    print(f"{'kernel':<18} {'shape':<{width}} {'numba ms':>10} {'numpy ms':>10} "
          f"{'speedup':>8} {'1st-call ms':>12}")
    for kernel_name, shape_name, numba_ms, numpy_ms, compile_ms in rows:
        speedup = numpy_ms / numba_ms if numba_ms else float("inf")
        print(f"{kernel_name:<18} {shape_name:<{width}} {numba_ms:>10.3f} "
              f"{numpy_ms:>10.3f} {speedup:>7.2f}x {compile_ms:>12.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
