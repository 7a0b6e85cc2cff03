"""Kernel selection: jitted de Boor when numba is available, vectorized
numpy otherwise. Set GWPKAN_NUMBA=0 to force the numpy path (the benchmark
in benchmarks/bench_splines.py compares the two directly)."""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_numpy
from .grid import SplineGrid

__all__ = ["HAS_NUMBA", "USING_NUMBA", "basis_and_deriv", "basis_only",
           "bspline_basis"]

try:
    from . import _kernels_numba
    HAS_NUMBA = True
except ImportError:
    _kernels_numba = None
    HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and os.environ.get("GWPKAN_NUMBA", "1") != "0"

_impl = _kernels_numba if USING_NUMBA else _kernels_numpy


def basis_and_deriv(x: np.ndarray, grid: SplineGrid):
    """(basis, d_basis/dx) matrices of shape (len(x), grid.n_basis)."""
    return _impl.basis_and_deriv(x, grid.knots, grid.order)


def basis_only(x: np.ndarray, grid: SplineGrid) -> np.ndarray:
    return _impl.basis_only(x, grid.knots, grid.order)


def bspline_basis(grid: SplineGrid, x: float) -> np.ndarray:
    """All G+k basis values at one point (clamped into [lo, hi])."""
    if not np.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    return basis_only(np.asarray([x], dtype=np.float64), grid)[0]
