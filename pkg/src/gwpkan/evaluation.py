"""Model assessment: metrics, learning curves over log-scale folds,
log-bin error analysis, permutation-based importance, and the
model-by-feature-combination grid.

Every report is deterministic given its seed; importance numbers carry the
repeat count and seed so they are never mistaken for a different method's
output.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .data_model import Dataset, FoldPartition
from .descriptors import FeatureMatrix, join_features

__all__ = [
    "Metrics", "LearningCurve", "ErrorBins", "ImportanceReport", "ComboGrid",
    "COMBO_LABELS", "metrics", "learning_curve", "error_bins",
    "permutation_importance", "combo_grid",
]

COMBO_LABELS = ("Ma", "Mo", "L", "T", "D")


@dataclass(frozen=True)
class Metrics:
    r2: float
    mse: float
    mae: float
    n: int
    r2_undefined: bool = False

    def to_dict(self) -> dict:
        return {"r2": None if self.r2_undefined else self.r2,
                "mse": self.mse, "mae": self.mae, "n": self.n,
                "r2_undefined": self.r2_undefined}


@dataclass(frozen=True)
class LearningCurve:
    points: tuple[dict, ...]  # fold_count, cumulative_data_fraction, test_r2
    skipped: tuple[dict, ...] = ()


@dataclass(frozen=True)
class ErrorBins:
    edges: tuple[float, ...]
    counts: tuple[int, ...]
    mae: tuple[float, ...]
    variance: tuple[float, ...]
    empty_bins: tuple[int, ...]


@dataclass(frozen=True)
class ImportanceReport:
    per_feature: tuple[dict, ...]   # name, importance, std
    group_shares: dict[str, float]  # percentages summing to 100
    repeats: int
    seed: int
    method: str = "permutation"


@dataclass(frozen=True)
class ComboGrid:
    models: tuple[str, ...]
    combos: tuple[str, ...]
    cells: dict = field(default_factory=dict)  # (model, combo) -> {r2, run_id}
    seed: int = 0
    split: str = "seeded 80/20"


def metrics(pred, actual) -> Metrics:
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape or pred.ndim != 1:
        raise ValueError(f"length mismatch: pred {pred.shape}, actual {actual.shape}")
    if pred.size == 0:
        raise ValueError("empty prediction arrays")
    err = pred - actual
    mse = float(np.mean(err ** 2))
    mae = float(np.mean(np.abs(err)))
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot == 0.0:
        return Metrics(r2=float("nan"), mse=mse, mae=mae, n=pred.size,
                       r2_undefined=True)
    r2 = 1.0 - float(np.sum(err ** 2)) / ss_tot
    return Metrics(r2=r2, mse=mse, mae=mae, n=pred.size)


def learning_curve(d: Dataset, p: FoldPartition, features: np.ndarray,
                   trainer, seed: int = 0, min_rows: int = 10,
                   test_fraction: float = 0.2) -> LearningCurve:
    """Grow the training pool one log fold at a time and track test R^2.

    ``trainer(x, y, seed) -> model with predict`` must be deterministic for
    a given seed. Steps whose cumulative pool has fewer than ``min_rows``
    usable rows (or adds no new rows) are skipped and flagged.
    """
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(d.log_targets(), dtype=np.float64)
    assignments = np.asarray(p.assignments)
    if features.shape[0] != targets.shape[0]:
        raise ValueError("features not aligned with dataset rows")
    total = targets.shape[0]
    points: list[dict] = []
    skipped: list[dict] = []
    prev_n = -1
    for step in range(p.n_folds):
        mask = assignments <= step
        n = int(mask.sum())
        if n < min_rows or n == prev_n:
            reason = "too few rows" if n < min_rows else "no new rows"
            skipped.append({"fold_count": step + 1, "rows": n, "reason": reason})
            continue
        prev_n = n
        x_pool, y_pool = features[mask], targets[mask]
        rng = np.random.Generator(np.random.PCG64(seed + step))
        order = rng.permutation(n)
        n_test = max(1, int(round(test_fraction * n)))
        test_idx, train_idx = order[:n_test], order[n_test:]
        model = trainer(x_pool[train_idx], y_pool[train_idx], seed)
        m = metrics(model.predict(x_pool[test_idx]), y_pool[test_idx])
        points.append({"fold_count": step + 1,
                       "cumulative_data_fraction": n / total,
                       "test_r2": m.r2})
    return LearningCurve(points=tuple(points), skipped=tuple(skipped))


def error_bins(pred_log, actual_log, width: float = 1.0) -> ErrorBins:
    """Absolute-error statistics grouped by the log10 magnitude of the truth.

    Bins of the given width cover [floor(min), ceil(max)); empty bins are
    kept (count 0) so plots expose sparsity at the extremes.
    """
    pred = np.asarray(pred_log, dtype=np.float64)
    actual = np.asarray(actual_log, dtype=np.float64)
    if pred.shape != actual.shape or pred.ndim != 1 or pred.size == 0:
        raise ValueError(f"length mismatch: pred {pred.shape}, actual {actual.shape}")
    if width <= 0:
        raise ValueError(f"bin width must be > 0, got {width}")
    lo = math.floor(actual.min())
    hi = math.ceil(actual.max())
    if hi <= lo:
        hi = lo + width
    n_bins = int(math.ceil((hi - lo) / width))
    edges = tuple(lo + i * width for i in range(n_bins + 1))
    abs_err = np.abs(pred - actual)
    idx = np.clip(((actual - lo) / width).astype(int), 0, n_bins - 1)
    counts, maes, variances, empty = [], [], [], []
    for b in range(n_bins):
        sel = abs_err[idx == b]
        counts.append(int(sel.size))
        if sel.size:
            maes.append(float(sel.mean()))
            variances.append(float(sel.var()))
        else:
            maes.append(0.0)
            variances.append(0.0)
            empty.append(b)
    return ErrorBins(edges=edges, counts=tuple(counts), mae=tuple(maes),
                     variance=tuple(variances), empty_bins=tuple(empty))


def permutation_importance(model, x: FeatureMatrix, y, groups: dict[str, list[str]],
                           repeats: int = 10, seed: int = 0) -> ImportanceReport:
    """Mean R^2 drop when each column is shuffled; groups share out to 100%.

    ``groups`` must partition the columns exactly; overlaps or omissions are
    an error. Negative group totals are clipped at zero before the shares
    are rescaled.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    y = np.asarray(y, dtype=np.float64)
    claimed: dict[str, str] = {}
    for gname, cols in groups.items():
        for c in cols:
            if c in claimed:
                raise ValueError(f"column {c!r} appears in groups "
                                 f"{claimed[c]!r} and {gname!r}")
            claimed[c] = gname
    missing = [c for c in x.column_names if c not in claimed]
    unknown = [c for c in claimed if c not in x.column_names]
    if missing or unknown:
        raise ValueError(f"groups must partition the columns; "
                         f"uncovered {missing[:5]}, unknown {unknown[:5]}")

    from .estimators import r2_score

    base = r2_score(y, model.predict(x.rows))
    rng = np.random.Generator(np.random.PCG64(seed))
    per_feature = []
    for j, name in enumerate(x.column_names):
        drops = []
        for _ in range(repeats):
            shuffled = x.rows.copy()
            shuffled[:, j] = shuffled[rng.permutation(x.rows.shape[0]), j]
            drops.append(base - r2_score(y, model.predict(shuffled)))
        drops_arr = np.asarray(drops)
        per_feature.append({"name": name,
                            "importance": float(drops_arr.mean()),
                            "std": float(drops_arr.std())})
    by_name = {f["name"]: f["importance"] for f in per_feature}
    group_pos = {g: max(0.0, sum(by_name[c] for c in cols))
                 for g, cols in groups.items()}
    total = sum(group_pos.values())
    if total > 0:
        shares = {g: 100.0 * v / total for g, v in group_pos.items()}
    else:
        shares = {g: 100.0 / len(groups) for g in groups}
    return ImportanceReport(per_feature=tuple(per_feature), group_shares=shares,
                            repeats=repeats, seed=seed)


def _validate_combo(combo: str, available: set[str]) -> list[str]:
    tokens = combo.split("+")
    seen = set()
    for t in tokens:
        if t not in COMBO_LABELS:
            raise ValueError(f"unknown feature-set label {t!r} in {combo!r}; "
                             f"labels are {COMBO_LABELS}")
        if t in seen:
            raise ValueError(f"duplicate label {t!r} in union {combo!r}")
        if t not in available:
            raise ValueError(f"no feature part supplied for label {t!r}")
        seen.add(t)
    return tokens


def combo_grid(parts: dict[str, FeatureMatrix], y, models: dict,
               combos: list[str], seed: int = 0,
               test_fraction: float = 0.2) -> ComboGrid:
    """Test R^2 for every (model, feature-combination) pair.

    ``models`` maps a name to trainer(x, y, seed) -> model. All pairs share
    one seeded 80/20 split so cells are comparable; each cell records a run
    id derived from (model, combo, seed).
    """
    y = np.asarray(y, dtype=np.float64)
    for label in parts:
        if label not in COMBO_LABELS:
            raise ValueError(f"part label {label!r} not in {COMBO_LABELS}")
    n = y.shape[0]
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n)
    n_test = max(1, int(round(test_fraction * n)))
    test_idx, train_idx = order[:n_test], order[n_test:]

    grid = ComboGrid(models=tuple(models), combos=tuple(combos), seed=seed)
    for combo in combos:
        tokens = _validate_combo(combo, set(parts))
        joined = join_features([parts[t] for t in tokens])
        for model_name in models:
            run_id = hashlib.sha256(
                f"{model_name}|{combo}|{seed}".encode()).hexdigest()[:12]
            model = models[model_name](joined.rows[train_idx], y[train_idx], seed)
            m = metrics(model.predict(joined.rows[test_idx]), y[test_idx])
            grid.cells[(model_name, combo)] = {"r2": m.r2, "run_id": run_id}
    return grid
