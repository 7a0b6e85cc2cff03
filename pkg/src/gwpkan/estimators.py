"""Small deterministic regressors shared by feature selection, the dimension
sweep, and the evaluation grids.

``ridge`` is the default workhorse: closed-form, fast, and its standardized
coefficients double as feature importances. ``baseline_net`` wraps the dense
network from :mod:`gwpkan.kan.baseline` behind the same interface.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RidgeModel", "fit_ridge", "make_estimator", "kfold_indices", "r2_score"]


class RidgeModel:
    """Linear model fit on z-scored features with an L2 penalty."""

    def __init__(self, coef: np.ndarray, intercept: float,
                 mean: np.ndarray, scale: np.ndarray):
        self.coef = coef
        self.intercept = intercept
        self.mean = mean
        self.scale = scale

    def predict(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.scale
        return z @ self.coef + self.intercept

    def importances(self) -> np.ndarray:
        """|coefficient| in standardized units; comparable across features."""
        return np.abs(self.coef)


def fit_ridge(x: np.ndarray, y: np.ndarray, alpha: float = 1.0) -> RidgeModel:
    """Closed-form ridge on standardized features, intercept unpenalized."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: x {x.shape}, y {y.shape}")
    if x.shape[1] == 0:
        return RidgeModel(np.zeros(0), float(np.mean(y)), np.zeros(0), np.ones(0))
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    z = (x - mean) / scale
    yc = y - y.mean()
    gram = z.T @ z + alpha * np.eye(z.shape[1])
    coef = np.linalg.solve(gram, z.T @ yc)
    return RidgeModel(coef, float(y.mean()), mean, scale)


def make_estimator(name: str, seed: int = 0, **kwargs):
    """Return fit(x, y) -> model for one of the supported estimator names."""
    if name == "ridge":
        alpha = kwargs.get("alpha", 1.0)
        return lambda x, y: fit_ridge(x, y, alpha=alpha)
    if name == "baseline_net":
        from .kan.baseline import BaselineConfig, baseline_net_train

        cfg = BaselineConfig(seed=seed, **kwargs)
        return lambda x, y: baseline_net_train(x, y, cfg)
    raise ValueError(f"unknown estimator {name!r} (expected ridge or baseline_net)")


def kfold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic shuffled k-fold index sets covering range(n)."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if n < folds:
        raise ValueError(f"need at least {folds} rows for {folds}-fold CV, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n)
    return [np.sort(part) for part in np.array_split(order, folds)]


def r2_score(actual: np.ndarray, pred: np.ndarray) -> float:
    actual = np.asarray(actual, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    ss_res = float(np.sum((actual - pred) ** 2))
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot == 0.0:
        return float("nan")
    return 1.0 - ss_res / ss_tot
