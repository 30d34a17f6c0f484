#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs every kernel pair from weakps.kernels.IMPLEMENTATIONS on sweep-sized
inputs and prints per-kernel timings and speedups.  Run without
WEAKPS_NO_NUMBA so both backends are importable:

    python benchmarks/bench_kernels.py [--n 2000000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from weakps import kernels

KAPPA = 0.335
SIGN = -1.0


def _timeit(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=2_000_000, help="grid size for curve kernels")
    parser.add_argument("--n-invert", type=int, default=200_000, help="batch size for inversion")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not kernels.NUMBA_IMPORTED:
        print("numba backend unavailable (missing or disabled via WEAKPS_NO_NUMBA); "
              "nothing to compare")
        return 1

    theta = np.linspace(0.0, np.pi / 2.0, args.n)
    # inversion targets on the rising branch below the curve maximum
    r = np.sqrt(1.0 - KAPPA**2)
    lo, hi = 0.0, float(np.arcsin(r) / 4.0) - 1e-6
    targets = np.linspace(1.0, 1.0 / KAPPA - 1e-3, args.n_invert)

    cases = {
        "weak_value_curve": (theta, KAPPA, SIGN),
        "weak_value_slope": (theta, KAPPA, SIGN),
        "postselect_probability": (theta, KAPPA, SIGN),
        "fisher_curve": (theta, KAPPA, SIGN),
        "pusey_curves": (theta, KAPPA, SIGN),
        "invert_sigma": (targets, KAPPA, SIGN, lo, hi),
    }

    print(f"backend in use: {'numba' if kernels.USING_NUMBA else 'numpy'}; "
          f"n={args.n}, n_invert={args.n_invert}, repeats={args.repeats}")
    header = f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, case_args in cases.items():
        pair = kernels.IMPLEMENTATIONS[name]
        np_fn, nb_fn = pair["numpy"], pair["numba"]
        nb_fn(*case_args)  # compile outside the timed region
        t_np = _timeit(np_fn, case_args, args.repeats)
        t_nb = _timeit(nb_fn, case_args, args.repeats)
        print(f"{name:<24}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.2f}x")

    # agreement spot-check while both backends are loaded
    worst = 0.0
    for name, case_args in cases.items():
        pair = kernels.IMPLEMENTATIONS[name]
        a = pair["numpy"](*case_args)
        b = pair["numba"](*case_args)
        if isinstance(a, tuple):
            for x, y in zip(a, b):
                worst = max(worst, float(np.nanmax(np.abs(x - y))))
        else:
            mask = np.isfinite(a) & np.isfinite(b)
            worst = max(worst, float(np.max(np.abs(a[mask] - b[mask]))))
    print(f"max |numpy - numba| across kernels: {worst:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
