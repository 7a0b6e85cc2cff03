"""Pure-numpy spline kernels: vectorized Cox-de Boor over the full basis.

Fallback path for environments without numba (or with GWPKAN_NUMBA=0); the
jitted kernels in _kernels_numba must agree with these to float precision.
"""

from __future__ import annotations

import numpy as np


def basis_and_deriv(x: np.ndarray, knots: np.ndarray, k: int):
    """Basis matrix (N, G+k) and its x-derivative for clamped inputs x."""
    lo, hi = knots[k], knots[-k - 1]
    xc = np.clip(np.asarray(x, dtype=np.float64), lo, hi)
    xcol = xc[:, None]
    b = ((xcol >= knots[None, :-1]) & (xcol < knots[None, 1:])).astype(np.float64)
    bm1 = b
    for d in range(1, k + 1):
        if d == k:
            bm1 = b
        left_den = knots[d:-1] - knots[:-d - 1]
        right_den = knots[d + 1:] - knots[1:-d]
        b = ((xcol - knots[None, :-d - 1]) / left_den) * b[:, :-1] \
            + ((knots[None, d + 1:] - xcol) / right_den) * b[:, 1:]
    h = knots[1] - knots[0]
    deriv = (bm1[:, :-1] - bm1[:, 1:]) / h
    return b, deriv


def basis_only(x: np.ndarray, knots: np.ndarray, k: int) -> np.ndarray:
    return basis_and_deriv(x, knots, k)[0]
