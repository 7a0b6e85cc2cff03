"""Jitted spline kernels: per-point de Boor over the k+1 local basis values.

Hot path of every forward/backward pass; only the nonzero window of the
basis is computed and scattered into the dense output.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _fill_basis_deriv(x, knots, k, out_b, out_d, want_deriv):
    n = x.shape[0]
    n_knots = knots.shape[0]
    nb = n_knots - k - 1
    h = knots[1] - knots[0]
    lo = knots[k]
    hi = knots[n_knots - 1 - k]
    vals = np.zeros(k + 1)
    lower = np.zeros(k)
    for p in range(n):
        xv = x[p]
        if xv < lo:
            xv = lo
        elif xv > hi:
            xv = hi
        s = k + int((xv - lo) / h)
        if s > nb - 1:
            s = nb - 1
        while s > k and xv < knots[s]:
            s -= 1
        while s < nb - 1 and xv >= knots[s + 1]:
            s += 1
        vals[0] = 1.0
        for d in range(1, k + 1):
            if d == k:
                for r in range(k):
                    lower[r] = vals[r]
            saved = 0.0
            for r in range(d):
                rt = knots[s + r + 1] - xv
                lf = xv - knots[s + 1 - d + r]
                tmp = vals[r] / (rt + lf)
                vals[r] = saved + rt * tmp
                saved = lf * tmp
            vals[d] = saved
        base = s - k
        for j in range(k + 1):
            out_b[p, base + j] = vals[j]
        if want_deriv:
            for j in range(k + 1):
                nl = lower[j - 1] if j >= 1 else 0.0
                nr = lower[j] if j <= k - 1 else 0.0
                out_d[p, base + j] = (nl - nr) / h


def basis_and_deriv(x: np.ndarray, knots: np.ndarray, k: int):
    x = np.ascontiguousarray(x, dtype=np.float64)
    nb = knots.shape[0] - k - 1
    out_b = np.zeros((x.shape[0], nb))
    out_d = np.zeros((x.shape[0], nb))
    _fill_basis_deriv(x, knots, k, out_b, out_d, True)
    return out_b, out_d


def basis_only(x: np.ndarray, knots: np.ndarray, k: int) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    nb = knots.shape[0] - k - 1
    out_b = np.zeros((x.shape[0], nb))
    out_d = np.zeros((1, 1))
    _fill_basis_deriv(x, knots, k, out_b, out_d, False)
    return out_b
