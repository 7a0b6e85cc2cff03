"""Precomputed molecular descriptor tables and recursive feature elimination.

Descriptor values are produced elsewhere (a cheminformatics exporter or
user-supplied CSVs); this module only ingests, joins, and selects. The
structural fingerprint table is validated as 166 binary key columns; the
physicochemical table is cleaned of constant and non-finite columns.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .estimators import kfold_indices, make_estimator

__all__ = [
    "FeatureMatrix",
    "SelectionResult",
    "FeatureTableError",
    "MACCS_WIDTH",
    "load_descriptor_table",
    "join_features",
    "select_columns",
    "rfecv",
    "write_feature_csv",
    "read_feature_csv",
]

MACCS_WIDTH = 166


class FeatureTableError(ValueError):
    """Raised for malformed descriptor tables or invalid column requests."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Named-column dense real matrix keyed by record id."""

    column_names: tuple[str, ...]
    rows: np.ndarray
    row_ids: tuple[str, ...]
    label: str = ""
    cleaning_report: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.rows.shape != (len(self.row_ids), len(self.column_names)):
            raise FeatureTableError(
                f"matrix shape {self.rows.shape} does not match "
                f"{len(self.row_ids)} ids x {len(self.column_names)} columns")
        if len(set(self.column_names)) != len(self.column_names):
            raise FeatureTableError("duplicate column names")

    @property
    def width(self) -> int:
        return len(self.column_names)

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.column_names.index(name)
        except ValueError:
            raise FeatureTableError(f"unknown column {name!r}") from None
        return self.rows[:, j]


@dataclass(frozen=True)
class SelectionResult:
    kept_columns: tuple[str, ...]
    score_curve: tuple[tuple[int, float], ...]
    chosen_count: int
    score_stderr: tuple[float, ...] = ()


def _parse_cell(raw: str) -> float:
    raw = raw.strip()
    if not raw:
        return float("nan")
    try:
        return float(raw)
    except ValueError:
        return float("nan")


def load_descriptor_table(path: str, kind: str = "generic",
                          delimiter: str = ",") -> FeatureMatrix:
    """Load a descriptor CSV (header row, id in the first column).

    kind="maccs" enforces exactly 166 feature columns with cells in {0, 1}
    and keeps every key column (a key that happens to be constant across a
    small sample is still a valid fingerprint bit). kind="mordred" and
    "generic" drop constant or non-finite columns and itemize the drops in
    ``cleaning_report``.
    """
    if kind not in ("maccs", "mordred", "generic"):
        raise FeatureTableError(f"unknown table kind {kind!r}")
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise FeatureTableError(f"cannot read descriptor table {path!r}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise FeatureTableError(f"{path}: empty table") from None
        if len(header) < 2:
            raise FeatureTableError(f"{path}: need an id column plus feature columns")
        id_col, columns = header[0], header[1:]
        if len(set(columns)) != len(columns):
            raise FeatureTableError(f"{path}: duplicate feature columns in header")
        row_ids: list[str] = []
        data: list[list[float]] = []
        seen: set[str] = set()
        for row_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise FeatureTableError(
                    f"{path}: row {row_no}: expected {len(header)} cells, got {len(row)}")
            rid = row[0].strip()
            if rid in seen:
                raise FeatureTableError(f"{path}: row {row_no}: duplicate id {rid!r}")
            seen.add(rid)
            row_ids.append(rid)
            data.append([_parse_cell(c) for c in row[1:]])
        if not row_ids:
            raise FeatureTableError(f"{path}: table has a header but no data rows")

    matrix = np.asarray(data, dtype=np.float64)

    if kind == "maccs":
        if len(columns) != MACCS_WIDTH:
            raise FeatureTableError(
                f"{path}: structural key table must have {MACCS_WIDTH} feature "
                f"columns, got {len(columns)}")
        bad = np.argwhere(~np.isin(matrix, (0.0, 1.0)))
        if bad.size:
            i, j = bad[0]
            raise FeatureTableError(
                f"{path}: non-binary key cell at row id {row_ids[i]!r}, "
                f"column {columns[j]!r}: {matrix[i, j]!r}")
        return FeatureMatrix(tuple(columns), matrix, tuple(row_ids),
                             label="maccs", cleaning_report={"dropped": []})

    nonfinite = ~np.all(np.isfinite(matrix), axis=0)
    constant = np.all(matrix == matrix[0:1, :], axis=0)
    drop = nonfinite | constant
    dropped = [{"column": columns[j],
                "reason": "non-finite" if nonfinite[j] else "constant"}
               for j in np.flatnonzero(drop)]
    keep = ~drop
    kept_cols = tuple(c for c, k in zip(columns, keep) if k)
    return FeatureMatrix(kept_cols, matrix[:, keep], tuple(row_ids),
                         label=kind if kind != "generic" else id_col,
                         cleaning_report={"dropped": dropped})


def join_features(parts: list[FeatureMatrix]) -> FeatureMatrix:
    """Horizontally concatenate descriptor tables, aligning rows by id.

    Column-name collisions are disambiguated with the owning part's label.
    Any difference in id sets is an error that reports the symmetric
    difference; row order follows the first part.
    """
    if not parts:
        raise FeatureTableError("join_features needs at least one part")
    if len(parts) == 1:
        return parts[0]
    base_ids = parts[0].row_ids
    base_set = set(base_ids)
    for i, part in enumerate(parts[1:], start=1):
        part_set = set(part.row_ids)
        if part_set != base_set:
            missing = sorted(base_set - part_set)
            extra = sorted(part_set - base_set)
            raise FeatureTableError(
                f"row-id mismatch in part {i}: missing {missing[:10]}, "
                f"unexpected {extra[:10]}")

    name_count: dict[str, int] = {}
    for part in parts:
        for c in part.column_names:
            name_count[c] = name_count.get(c, 0) + 1

    aligned_rows = []
    final_names: list[str] = []
    for i, part in enumerate(parts):
        if part.row_ids != base_ids:
            index = {rid: k for k, rid in enumerate(part.row_ids)}
            order = [index[rid] for rid in base_ids]
            aligned_rows.append(part.rows[order, :])
        else:
            aligned_rows.append(part.rows)
        prefix = part.label or f"p{i}"
        for c in part.column_names:
            final_names.append(f"{prefix}:{c}" if name_count[c] > 1 else c)
    if len(set(final_names)) != len(final_names):
        raise FeatureTableError("column names still collide after part-label prefixing")
    return FeatureMatrix(tuple(final_names), np.hstack(aligned_rows), base_ids)


def select_columns(x: FeatureMatrix, names: list[str] | tuple[str, ...]) -> FeatureMatrix:
    """Project onto the named columns, preserving the requested order."""
    index = {c: j for j, c in enumerate(x.column_names)}
    missing = [n for n in names if n not in index]
    if missing:
        raise FeatureTableError(f"unknown columns {missing[:10]}")
    cols = [index[n] for n in names]
    rows = x.rows[:, cols] if cols else np.zeros((len(x.row_ids), 0))
    return FeatureMatrix(tuple(names), rows, x.row_ids, label=x.label)


def write_feature_csv(x: FeatureMatrix, path: str) -> None:
    """Exact-value CSV (repr floats) for intermediate pipeline artifacts."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("id",) + x.column_names)
        for rid, row in zip(x.row_ids, x.rows):
            writer.writerow((rid,) + tuple(repr(float(v)) for v in row))
    os.replace(tmp, path)


def read_feature_csv(path: str, label: str = "") -> FeatureMatrix:
    """Inverse of write_feature_csv: no cleaning, all cells must be finite."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FeatureTableError(f"{path}: empty table") from None
        columns = tuple(header[1:])
        row_ids, data = [], []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            row_ids.append(row[0])
            try:
                data.append([float(c) for c in row[1:]])
            except ValueError as exc:
                raise FeatureTableError(f"{path}: row {row_no}: {exc}") from None
    matrix = np.asarray(data, dtype=np.float64) if data \
        else np.zeros((0, len(columns)))
    if matrix.size and not np.all(np.isfinite(matrix)):
        raise FeatureTableError(f"{path}: non-finite cells")
    return FeatureMatrix(columns, matrix, tuple(row_ids), label=label)


def _cv_round(rows: np.ndarray, y: np.ndarray, fold_idx: list[np.ndarray],
              estimator_name: str, seed: int, alpha: float,
              perm_repeats: int) -> tuple[float, float, np.ndarray]:
    """One CV pass: (mean neg-MSE, std error, mean per-feature importance)."""
    n = rows.shape[0]
    all_idx = np.arange(n)
    scores = []
    importances = np.zeros(rows.shape[1])
    fit = make_estimator(estimator_name, seed=seed, alpha=alpha) \
        if estimator_name == "ridge" else make_estimator(estimator_name, seed=seed)
    for k, val_idx in enumerate(fold_idx):
        train_idx = np.setdiff1d(all_idx, val_idx)
        model = fit(rows[train_idx], y[train_idx])
        pred = model.predict(rows[val_idx])
        scores.append(-float(np.mean((pred - y[val_idx]) ** 2)))
        if hasattr(model, "importances"):
            importances += model.importances()
        else:
            importances += _permutation_drop(model, rows[val_idx], y[val_idx],
                                             seed + 104729 * (k + 1), perm_repeats)
    importances /= len(fold_idx)
    scores_arr = np.asarray(scores)
    stderr = float(scores_arr.std(ddof=1) / math.sqrt(len(scores))) if len(scores) > 1 else 0.0
    return float(scores_arr.mean()), stderr, importances


def _permutation_drop(model, x: np.ndarray, y: np.ndarray, seed: int,
                      repeats: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    base = -float(np.mean((model.predict(x) - y) ** 2))
    drops = np.zeros(x.shape[1])
    for j in range(x.shape[1]):
        acc = 0.0
        for _ in range(repeats):
            shuffled = x.copy()
            shuffled[:, j] = shuffled[rng.permutation(x.shape[0]), j]
            acc += base - (-float(np.mean((model.predict(shuffled) - y) ** 2)))
        drops[j] = acc / repeats
    return drops


def rfecv(x: FeatureMatrix, y, folds: int = 10, step_fraction: float = 0.1,
          estimator: str = "ridge", seed: int = 0, alpha: float = 1.0,
          perm_repeats: int = 3, one_at_a_time_below: int = 100) -> SelectionResult:
    """Recursive feature elimination scored by k-fold CV negative MSE.

    Each round scores the surviving feature set, ranks features (ridge:
    |standardized coefficient|; baseline_net: permutation importance), and
    drops the weakest ceil(step_fraction * count) of them, switching to
    one-at-a-time elimination once the count falls to
    ``one_at_a_time_below``. The chosen count is the smallest whose mean
    score lies within one standard error of the best mean score.
    """
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain non-finite values")
    if x.rows.shape[0] != y.shape[0]:
        raise ValueError(
            f"feature matrix height {x.rows.shape[0]} != target length {y.shape[0]}")
    if not 0.0 < step_fraction <= 0.5:
        raise ValueError(f"step_fraction must be in (0, 0.5], got {step_fraction}")
    fold_idx = kfold_indices(x.rows.shape[0], folds, seed)

    alive = list(range(x.width))
    curve: list[tuple[int, float]] = []
    stderrs: list[float] = []
    alive_history: list[list[int]] = []
    while True:
        mean_score, stderr, importances = _cv_round(
            x.rows[:, alive], y, fold_idx, estimator, seed, alpha, perm_repeats)
        curve.append((len(alive), mean_score))
        stderrs.append(stderr)
        alive_history.append(list(alive))
        if len(alive) == 1:
            break
        if len(alive) > one_at_a_time_below:
            step = math.ceil(step_fraction * len(alive))
        else:
            step = 1
        step = min(step, len(alive) - 1)
        # ties broken toward the later column so elimination order is total
        order = np.lexsort((-np.arange(len(alive)), importances))
        doomed = set(order[:step].tolist())
        alive = [f for i, f in enumerate(alive) if i not in doomed]

    best_round = max(range(len(curve)), key=lambda i: curve[i][1])
    floor = curve[best_round][1] - stderrs[best_round]
    chosen_round = best_round
    for i in range(len(curve)):
        if curve[i][1] >= floor and curve[i][0] < curve[chosen_round][0]:
            chosen_round = i
    kept_idx = sorted(alive_history[chosen_round])
    kept = tuple(x.column_names[j] for j in kept_idx)
    return SelectionResult(kept_columns=kept, score_curve=tuple(curve),
                           chosen_count=len(kept), score_stderr=tuple(stderrs))
