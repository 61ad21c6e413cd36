#!/usr/bin/env python3
"""Timing comparison between the compiled (numba) kernels and the pure
numpy fallback, on the two hot paths: lattice propagation and batched
collapse trials.

Run from an environment where the package is installed:

    python3 benchmarks/run_benchmarks.py           # full sizes
    python3 benchmarks/run_benchmarks.py --quick   # smaller workloads
"""

import argparse
import time

import numpy as np

from braggqnd import BraggGeometry, flip_frequencies, make_coherent
from braggqnd import _kernels_numpy
from braggqnd._rng import derive_seeds

try:
    from braggqnd import _kernels_numba
except ImportError:
    _kernels_numba = None


def best_of(fn, repeat):
    timings = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def propagation_workload(bound, t_max):
    ls = np.arange(-bound, bound + 1, 2, dtype=np.float64)
    diag = ls * (ls + 4.0)
    c0 = np.zeros(ls.size, dtype=np.complex128)
    c0[bound // 2] = 1.0
    grid = np.linspace(0.0, t_max, 101)

    def call(mod):
        out, nsteps, _ = mod.propagate_grid(diag, 0.1, c0, grid, 1e-9, 1e-13, 50_000_000)
        assert nsteps > 0
        return out

    return call, f"propagate {ls.size} sites to t_bar={t_max:g}"


def collapse_workload(trials):
    geom = BraggGeometry(l0=4, chi_bar=0.02)
    probs0 = np.ascontiguousarray(make_coherent(10.0, 30).probs)
    b_half = 0.5 * flip_frequencies(geom, 30)
    seeds = derive_seeds(2024, 0, trials)
    t_list = np.ones(1)

    def call(mod):
        coll, atoms = mod.collapse_trials(
            probs0, b_half, 0, 157.0, 5026.0, t_list, 200, 1e-6, seeds, False
        )
        assert (coll >= 0).mean() > 0.9
        return coll

    return call, f"collapse {trials} trials (cap 200 atoms)"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    parser.add_argument("--repeat", type=int, default=2, help="timed repeats, best kept")
    args = parser.parse_args()

    if _kernels_numba is None:
        print("numba is not importable; timing the numpy kernels only\n")

    bound, t_max = (100, 500.0) if args.quick else (300, 2000.0)
    trials = 500 if args.quick else 5000
    workloads = [propagation_workload(bound, t_max), collapse_workload(trials)]

    rows = []
    for call, label in workloads:
        if _kernels_numba is not None:
            call(_kernels_numba)  # compile outside the timed region
            t_nb = best_of(lambda: call(_kernels_numba), args.repeat)
        else:
            t_nb = None
        t_np = best_of(lambda: call(_kernels_numpy), args.repeat)
        rows.append((label, t_nb, t_np))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numba':>9}  {'numpy':>9}  {'speedup':>8}")
    for label, t_nb, t_np in rows:
        if t_nb is None:
            print(f"{label:<{width}}  {'-':>9}  {t_np:>8.3f}s  {'-':>8}")
        else:
            print(f"{label:<{width}}  {t_nb:>8.3f}s  {t_np:>8.3f}s  {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
