#!/usr/bin/env python3
"""Benchmark the stability kernels: numba @njit vs pure numpy.

Times the full coarse circle sweep (the Monte Carlo hot path) on the
default geometry for a homogeneous and a heterogeneous field, importing
both kernel modules directly so one process compares the two backends
regardless of the SLOPEMC_NUMBA setting.

Usage: python bench/bench_kernels.py [--repeats N] [--json OUT]
"""

import argparse
import json
import time

import numpy as np

from slopemc.geometry import SlopeGeometry, build_grid
from slopemc.randfield import FieldStatistics, field_factor, realize_field
from slopemc.stability import SearchSpec


def _time_sweep(mod, circles, cu, args, repeats):
    xcs, ycs, rs = circles
    mod.sweep_min(xcs[:8], ycs[:8], rs[:8], cu, *args, 0.0)  # warm-up / JIT
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = mod.sweep_min(xcs, ycs, rs, cu, *args, 0.0)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write results as JSON")
    ns = ap.parse_args()

    import slopemc._kernels_numpy as k_numpy

    try:
        import slopemc._kernels_numba as k_numba
    except ImportError:
        k_numba = None
        print("numba not available; timing only the numpy backend")

    geom = SlopeGeometry()
    grid = build_grid(geom)
    spec = SearchSpec.default(geom)
    circles = spec.circle_arrays(geom.base_level)
    kargs = (grid.cell_index, grid.surf_top, grid.cell_size,
             grid.origin[0], grid.origin[1], geom.unit_weight)

    stats = FieldStatistics(mu_cu=22.3, cov=0.3, delta_h=6.0, delta_v=1.0)
    fields = {
        "homogeneous": np.full(grid.n_cells, 18.6),
        "heterogeneous": realize_field(field_factor(grid, stats), stats, 1234).values,
    }

    n = len(circles[0])
    print(f"grid: {grid.n_cells} cells, sweep: {n} circles, repeats: {ns.repeats}\n")
    print(f"{'field':>14} {'backend':>8} {'sweep (ms)':>12} {'us/circle':>10} {'min FOS':>9}")
    results = {}
    for name, cu in fields.items():
        row = {}
        t_np, out_np = _time_sweep(k_numpy, circles, cu, kargs, ns.repeats)
        print(f"{name:>14} {'numpy':>8} {t_np * 1e3:>12.1f} {t_np / n * 1e6:>10.2f} {out_np[0]:>9.4f}")
        row["numpy_s"] = t_np
        if k_numba is not None:
            t_nb, out_nb = _time_sweep(k_numba, circles, cu, kargs, ns.repeats)
            print(f"{name:>14} {'numba':>8} {t_nb * 1e3:>12.1f} {t_nb / n * 1e6:>10.2f} {out_nb[0]:>9.4f}")
            row["numba_s"] = t_nb
            row["speedup"] = t_np / t_nb
            drift = abs(out_np[0] - out_nb[0]) / out_np[0]
            print(f"{'':>14} {'':>8} speedup: {t_np / t_nb:>6.1f}x   backend fos drift: {drift:.2e}")
        results[name] = row
        print()

    if ns.json:
        with open(ns.json, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
        print(f"wrote {ns.json}")


if __name__ == "__main__":
    main()
