"""Principal component reduction of embedding matrices, the dimensionality
sweep that picks how many components each text field keeps, and 2-D
projection data for plots.

The sweep fits its PCA inside each training fold only; held-out rows never
touch the fitted model, which keeps the cross-validated scores honest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descriptors import FeatureMatrix
from .estimators import kfold_indices, make_estimator, r2_score

__all__ = [
    "PcaModel",
    "DimSweepResult",
    "PcaError",
    "fit_pca",
    "pca_transform",
    "pca_inverse_transform",
    "sweep_dimensions",
    "projection_2d",
]


class PcaError(ValueError):
    """Raised for invalid component counts or mismatched widths."""


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, input_dim), rows orthonormal
    explained_variance_ratio: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def input_dim(self) -> int:
        return self.components.shape[1]

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.flatten().tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "input_dim": self.input_dim,
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PcaModel":
        k, d = int(obj["k"]), int(obj["input_dim"])
        return cls(
            mean=np.asarray(obj["mean"], dtype=np.float64),
            components=np.asarray(obj["components"], dtype=np.float64).reshape(k, d),
            explained_variance_ratio=np.asarray(
                obj["explained_variance_ratio"], dtype=np.float64),
        )


@dataclass(frozen=True)
class DimSweepResult:
    candidate_dims: tuple[int, ...]
    scores: tuple[float, ...]
    best_dim: int
    fold_models: dict | None = None  # (dim, fold) -> PcaModel when captured


def fit_pca(x: FeatureMatrix | np.ndarray, k: int) -> PcaModel:
    """Top-k principal axes of the centered matrix via SVD.

    Sign convention: the largest-magnitude entry of every component is made
    positive so serialized models reproduce across platforms. k must not
    exceed the numerical rank of the centered data.
    """
    rows = x.rows if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    n, d = rows.shape
    if n < 2:
        raise PcaError(f"need at least 2 rows to fit, got {n}")
    if not 1 <= k <= min(n - 1, d):
        raise PcaError(f"k must be in [1, {min(n - 1, d)}], got {k}")
    mean = rows.mean(axis=0)
    centered = rows - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    tol = s[0] * max(n, d) * np.finfo(np.float64).eps if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > tol))
    if k > rank:
        raise PcaError(f"k={k} exceeds numerical rank {rank} of the centered data")
    components = vt[:k].copy()
    for i in range(k):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    total_var = float(np.sum(s ** 2))
    ratio = (s[:k] ** 2) / total_var if total_var > 0 else np.zeros(k)
    return PcaModel(mean=mean, components=components,
                    explained_variance_ratio=ratio)


def pca_transform(m: PcaModel, x: FeatureMatrix, prefix: str = "") -> FeatureMatrix:
    """Project rows onto the principal axes; columns become <prefix>_pc0.."""
    if x.width != m.input_dim:
        raise PcaError(f"matrix width {x.width} != model input dim {m.input_dim}")
    prefix = prefix or x.label or "pca"
    reduced = (x.rows - m.mean) @ m.components.T
    names = tuple(f"{prefix}_pc{j}" for j in range(m.k))
    return FeatureMatrix(names, reduced, x.row_ids, label=prefix)


def pca_inverse_transform(m: PcaModel, reduced: np.ndarray) -> np.ndarray:
    return np.asarray(reduced, dtype=np.float64) @ m.components + m.mean


def sweep_dimensions(embeds: FeatureMatrix, y, candidate_dims: list[int],
                     folds: int = 10, estimator: str = "ridge", seed: int = 0,
                     alpha: float = 1.0,
                     capture_fold_models: bool = False) -> DimSweepResult:
    """Cross-validated R^2 for each candidate component count.

    For each dim the PCA is refit on the training rows of every fold; the
    best dim maximizes mean R^2, with ties resolved toward the smaller
    (cheaper) dimensionality.
    """
    dims = list(candidate_dims)
    if not dims or any(b <= a for a, b in zip(dims, dims[1:])):
        raise PcaError(f"candidate_dims must be ascending and non-empty, got {dims}")
    y = np.asarray(y, dtype=np.float64)
    if embeds.rows.shape[0] != y.shape[0]:
        raise PcaError("matrix height does not match target length")
    fold_idx = kfold_indices(embeds.rows.shape[0], folds, seed)
    all_idx = np.arange(embeds.rows.shape[0])
    fit = make_estimator(estimator, seed=seed, alpha=alpha) \
        if estimator == "ridge" else make_estimator(estimator, seed=seed)

    fold_models: dict = {}
    scores = []
    for k in dims:
        fold_scores = []
        for f, val_idx in enumerate(fold_idx):
            train_idx = np.setdiff1d(all_idx, val_idx)
            model = fit_pca(embeds.rows[train_idx], k)
            if capture_fold_models:
                fold_models[(k, f)] = model
            z_train = (embeds.rows[train_idx] - model.mean) @ model.components.T
            z_val = (embeds.rows[val_idx] - model.mean) @ model.components.T
            est = fit(z_train, y[train_idx])
            fold_scores.append(r2_score(y[val_idx], est.predict(z_val)))
        scores.append(float(np.mean(fold_scores)))

    best = 0
    for i in range(1, len(dims)):
        if scores[i] > scores[best]:
            best = i
    return DimSweepResult(candidate_dims=tuple(dims), scores=tuple(scores),
                          best_dim=dims[best],
                          fold_models=fold_models if capture_fold_models else None)


def projection_2d(x: FeatureMatrix, labels: list[str]) -> list[dict]:
    """Rows (id, pc0, pc1, label) of the 2-component projection, for plotting."""
    if x.width < 2:
        raise PcaError(f"need width >= 2 for a 2-D projection, got {x.width}")
    if len(labels) != len(x.row_ids):
        raise PcaError(f"{len(labels)} labels for {len(x.row_ids)} rows")
    model = fit_pca(x, 2)
    reduced = (x.rows - model.mean) @ model.components.T
    return [
        {"id": rid, "pc0": float(reduced[i, 0]), "pc1": float(reduced[i, 1]),
         "label": labels[i]}
        for i, rid in enumerate(x.row_ids)
    ]
