"""Benchmark the enumeration oracle's numba kernel against the numpy fallback.

Times the full two-/three-point enumeration at several grid sizes and prints
a comparison table.  The numba path is timed after a warm-up call so JIT
compilation is reported separately, not folded into the per-call numbers.

Usage: python3 bench/benchmark_kernels.py [--grids 61,121,201,301] [--repeat 5]
"""

import argparse
import time

import numpy as np

from robustprice._kernels import (DISP_TOL, MASS_TOL, _enumerate_impl,
                                  _enumerate_numpy)
from robustprice.ambiguity import variance_market
from robustprice.oracle import oracle_grid

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def time_call(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", default="61,121,201,301",
                    help="comma-separated grid sizes")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions; the best run is reported")
    args = ap.parse_args()
    grids = [int(g) for g in args.grids.split(",")]

    market = variance_market(0.5, 0.5, 1.2)
    p = 0.6

    if HAVE_NUMBA:
        kernel = njit(cache=True)(_enumerate_impl)
        g, _ = oracle_grid(market, p, 21)
        phi = np.asarray(market.measure.value(g), dtype=float)
        t0 = time.perf_counter()
        kernel(g, phi, market.mu, market.s, p, DISP_TOL, MASS_TOL)
        print(f"numba JIT compile + first call: {time.perf_counter() - t0:.2f} s")
    else:
        kernel = None
        print("numba not available; only the numpy fallback is timed")

    header = f"{'grid_n':>7} {'points':>7} {'triples':>12} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for grid_n in grids:
        g, _ = oracle_grid(market, p, grid_n)
        phi = np.asarray(market.measure.value(g), dtype=float)
        n = g.size
        n_triples = n * (n - 1) * (n - 2) // 6
        call_args = (g, phi, market.mu, market.s, p, DISP_TOL, MASS_TOL)
        t_np, out_np = time_call(_enumerate_numpy, call_args, args.repeat)
        if kernel is not None:
            t_nb, out_nb = time_call(kernel, call_args, args.repeat)
            assert abs(out_nb[0] - out_np[0]) < 1e-12, "backends disagree on min CR"
            assert abs(out_nb[1] - out_np[1]) < 1e-12, "backends disagree on min revenue"
            print(f"{grid_n:>7} {n:>7} {n_triples:>12} {t_nb * 1e3:>11.2f} "
                  f"{t_np * 1e3:>11.2f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{grid_n:>7} {n:>7} {n_triples:>12} {'-':>11} "
                  f"{t_np * 1e3:>11.2f} {'-':>8}")


if __name__ == "__main__":
    main()
