"""Uniform spline grids for learnable edge functions.

A grid covers [lo, hi] with G equal intervals and extends k extra uniform
steps past each end so that all G + k degree-k basis functions are defined
(and sum to one) everywhere on [lo, hi]. Inputs outside [lo, hi] are clamped
at evaluation time; the knots themselves are strictly ascending.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SplineGrid"]


@dataclass(frozen=True)
class SplineGrid:
    lo: float
    hi: float
    intervals: int
    order: int = 3
    knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.intervals < 1:
            raise ValueError(f"intervals must be >= 1, got {self.intervals}")
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if not self.hi > self.lo:
            raise ValueError(f"need hi > lo, got [{self.lo}, {self.hi}]")
        g, k = self.intervals, self.order
        h = (self.hi - self.lo) / g
        knots = self.lo + (np.arange(g + 2 * k + 1) - k) * h
        object.__setattr__(self, "knots", knots)

    @property
    def n_basis(self) -> int:
        return self.intervals + self.order

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.intervals

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi,
                "intervals": self.intervals, "order": self.order}

    @classmethod
    def from_dict(cls, obj: dict) -> "SplineGrid":
        return cls(lo=float(obj["lo"]), hi=float(obj["hi"]),
                   intervals=int(obj["intervals"]), order=int(obj["order"]))
