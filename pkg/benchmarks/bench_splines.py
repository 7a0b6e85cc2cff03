#!/usr/bin/env python3
"""Benchmark the jitted spline kernels against the pure-numpy fallback.

The basis/derivative evaluation is the hot inner loop of every network
forward and backward pass; this script times both implementations directly
(regardless of the GWPKAN_NUMBA env flag) and a full loss_and_grad step.
"""

import time

import numpy as np

from gwpkan.kan import KanNetwork, loss_and_grad
from gwpkan.kan.grid import SplineGrid
from gwpkan.kan import _kernels_numpy
from gwpkan.kan.kernels import HAS_NUMBA, USING_NUMBA

if HAS_NUMBA:
    from gwpkan.kan import _kernels_numba


def bench(fn, *args, repeats=50):
    fn(*args)  # warm up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    print("=" * 64)
    print("spline kernel benchmark: jitted vs pure numpy")
    print(f"numba available: {HAS_NUMBA} | package currently using numba: "
          f"{USING_NUMBA}")
    print("=" * 64)

    rng = np.random.default_rng(0)
    for n_points, intervals, order in ((1_000, 5, 3), (20_000, 5, 3),
                                       (200_000, 10, 3)):
        grid = SplineGrid(-1.0, 1.0, intervals, order)
        x = rng.uniform(-1.2, 1.2, n_points)
        t_np = bench(_kernels_numpy.basis_and_deriv, x, grid.knots, grid.order)
        line = (f"basis+deriv n={n_points:>7} G={intervals:>2} k={order}: "
                f"numpy {t_np * 1e3:8.3f} ms")
        if HAS_NUMBA:
            t_nb = bench(_kernels_numba.basis_and_deriv, x, grid.knots,
                         grid.order)
            line += f" | numba {t_nb * 1e3:8.3f} ms | speedup {t_np / t_nb:5.1f}x"
        print(line)

    print("-" * 64)
    net = KanNetwork.create([16, 8, 1], seed=0)
    x = rng.uniform(-1, 1, (4096, 16))
    y = rng.normal(0, 1, 4096)
    t_step = bench(lambda: loss_and_grad(net, x, y, 1e-3), repeats=20)
    print(f"full loss_and_grad step [16,8,1] batch 4096: {t_step * 1e3:.2f} ms "
          f"({'numba' if USING_NUMBA else 'numpy'} path)")
    print("set GWPKAN_NUMBA=0 to force the numpy fallback package-wide")


if __name__ == "__main__":
    main()
