"""Flow ingestion and preprocessing: market exclusion, location cleanup,
log-scale targets, and log-width fold partitioning.

Every operation returns a new ``Dataset``; nothing mutates in place, and each
mutating step is appended to the dataset's provenance log so reports can
itemize exactly what happened to the input rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

__all__ = [
    "FlowRecord",
    "Dataset",
    "LogTarget",
    "FoldPartition",
    "IngestError",
    "DEFAULT_SCHEMA",
    "load_flows",
    "exclude_market",
    "consolidate_location",
    "log_transform",
    "partition_log_folds",
    "truncate_to_fold",
]


class IngestError(ValueError):
    """Raised for unreadable/malformed flow inputs (bad file, column, cell)."""


# Logical column -> CSV header name. Callers override entries for files with
# different headers.
DEFAULT_SCHEMA = {
    "id": "id",
    "chemical_name": "chemical_name",
    "smiles": "smiles",
    "process_title": "process_title",
    "process_description": "process_description",
    "location": "location",
    "gwp": "gwp",
}

# Region labels that already sit at the granularity we consolidate to; they
# pass through unchanged even though some contain separator characters.
_REGION_LABELS = {"global", "europe", "rest-of-world"}

_LOCATION_SEPARATORS = (",", "-")

UNSPECIFIED_LOCATION = "UNSPECIFIED"


@dataclass(frozen=True)
class LogTarget:
    """log10 of a positive GWP value, kept alongside its source for audit."""

    value: float
    source_gwp: float


@dataclass(frozen=True)
class FlowRecord:
    """One LCA flow: chemical identity, process text, and its GWP target."""

    id: str
    chemical_name: str
    smiles: str
    process_title: str
    process_description: str
    location_raw: str
    gwp: float
    is_market: bool
    location: str = ""
    log_target: LogTarget | None = None


@dataclass(frozen=True)
class Dataset:
    records: tuple[FlowRecord, ...]
    source: str = ""
    provenance: tuple[dict, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.records)

    def with_step(self, step: dict, records: tuple[FlowRecord, ...]) -> "Dataset":
        return Dataset(records=records, source=self.source,
                       provenance=self.provenance + (step,))

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def log_targets(self) -> list[float]:
        missing = [r.id for r in self.records if r.log_target is None]
        if missing:
            raise IngestError(
                f"records without log targets: {missing[:5]}"
                f"{'...' if len(missing) > 5 else ''}; run log_transform first"
            )
        return [r.log_target.value for r in self.records]


@dataclass(frozen=True)
class FoldPartition:
    """Equal log-width folds over the observed target range.

    boundaries has n_folds + 1 strictly ascending entries; fold f covers
    [boundaries[f], boundaries[f+1]), with the last interval closed on the
    right. assignments[i] is the fold of records[i].
    """

    n_folds: int
    boundaries: tuple[float, ...]
    assignments: tuple[int, ...]
    empty_folds: tuple[int, ...] = ()


def _is_market_title(title: str) -> bool:
    first = title.strip().split(None, 1)
    return bool(first) and first[0].lower().rstrip(",") == "market"


def load_flows(path: str, schema: dict[str, str] | None = None,
               delimiter: str = ",") -> Dataset:
    """Read flow records from a delimited text file.

    ``is_market`` is set when the process title starts with the token
    "market" (case-insensitive, leading whitespace ignored). GWP cells must
    parse as finite numbers; any violation is reported with its row number.
    """
    schema = dict(DEFAULT_SCHEMA, **(schema or {}))
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read flows file {path!r}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [col for col in schema.values() if col not in header]
        if missing:
            raise IngestError(f"{path}: missing mapped columns {missing}")

        records: list[FlowRecord] = []
        seen: set[str] = set()
        for row_no, row in enumerate(reader, start=2):  # header is line 1
            rid = (row[schema["id"]] or "").strip()
            if not rid:
                raise IngestError(f"{path}: row {row_no}: empty id")
            if rid in seen:
                raise IngestError(f"{path}: row {row_no}: duplicate id {rid!r}")
            seen.add(rid)
            raw_gwp = (row[schema["gwp"]] or "").strip()
            try:
                gwp = float(raw_gwp)
            except ValueError:
                raise IngestError(
                    f"{path}: row {row_no}: non-numeric GWP cell {raw_gwp!r}"
                ) from None
            if not math.isfinite(gwp):
                raise IngestError(f"{path}: row {row_no}: non-finite GWP {raw_gwp!r}")
            title = row[schema["process_title"]] or ""
            location_raw = row[schema["location"]] or ""
            records.append(FlowRecord(
                id=rid,
                chemical_name=row[schema["chemical_name"]] or "",
                smiles=(row[schema["smiles"]] or "").strip(),
                process_title=title,
                process_description=row[schema["process_description"]] or "",
                location_raw=location_raw,
                gwp=gwp,
                is_market=_is_market_title(title),
                location=consolidate_location(location_raw),
            ))
    return Dataset(
        records=tuple(records),
        source=str(path),
        provenance=({"step": "load_flows", "rows": len(records)},),
    )


def exclude_market(d: Dataset) -> Dataset:
    """Drop rows flagged as market entries (averaged GWP, not a process)."""
    kept = tuple(r for r in d.records if not r.is_market)
    removed = [r.id for r in d.records if r.is_market]
    step = {"step": "exclude_market", "removed": len(removed),
            "kept": len(kept), "removed_ids": removed}
    if not kept:
        step["warning"] = "all rows were market entries; dataset is empty"
    return d.with_step(step, kept)


def consolidate_location(location_raw: str) -> str:
    """Collapse a country-city label to its country-level token.

    The token before the first comma or hyphen wins; strings without a
    separator and the known region labels pass through unchanged. The empty
    string maps to the UNSPECIFIED sentinel.
    """
    text = location_raw.strip()
    if not text:
        return UNSPECIFIED_LOCATION
    if text.lower() in _REGION_LABELS:
        return text
    cut = len(text)
    for sep in _LOCATION_SEPARATORS:
        pos = text.find(sep)
        if pos != -1:
            cut = min(cut, pos)
    return text[:cut].strip() or UNSPECIFIED_LOCATION


def log_transform(d: Dataset) -> tuple[Dataset, dict]:
    """Attach log10 targets; rows with GWP <= 0 are excluded and itemized.

    Non-positive targets cannot be placed on the log scale; shifting them
    would distort it, so they are reported instead of silently kept.
    """
    kept: list[FlowRecord] = []
    excluded: list[dict] = []
    for r in d.records:
        if r.gwp > 0.0:
            kept.append(replace(r, log_target=LogTarget(math.log10(r.gwp), r.gwp)))
        else:
            excluded.append({"id": r.id, "gwp": r.gwp})
    report = {
        "step": "log_transform",
        "transformed": len(kept),
        "excluded_nonpositive": len(excluded),
        "excluded": excluded,
    }
    return d.with_step(report, tuple(kept)), report


def partition_log_folds(d: Dataset, n: int = 10) -> FoldPartition:
    """Split the log-target range into n equal-width intervals.

    Folds may come out empty (flagged in ``empty_folds``); a degenerate
    all-equal target range is widened by a tiny epsilon so the boundaries
    stay strictly ascending and every record lands in fold 0.
    """
    if n < 1:
        raise ValueError(f"n_folds must be >= 1, got {n}")
    if not d.records:
        raise ValueError("cannot partition an empty dataset")
    targets = d.log_targets()
    lo, hi = min(targets), max(targets)
    if hi <= lo:
        hi = lo + 1e-9 * max(1.0, abs(lo)) * n
    width = (hi - lo) / n
    boundaries = tuple(lo + i * width for i in range(n)) + (hi,)
    assignments = []
    for v in targets:
        f = int((v - lo) / width)
        f = min(max(f, 0), n - 1)
        # float division can land one bin off near a boundary
        while f > 0 and v < boundaries[f]:
            f -= 1
        while f < n - 1 and v >= boundaries[f + 1]:
            f += 1
        assignments.append(f)
    counts = [0] * n
    for f in assignments:
        counts[f] += 1
    empty = tuple(i for i, c in enumerate(counts) if c == 0)
    return FoldPartition(n_folds=n, boundaries=boundaries,
                         assignments=tuple(assignments), empty_folds=empty)


def truncate_to_fold(d: Dataset, p: FoldPartition, max_fold: int) -> Dataset:
    """Keep records assigned to folds 0..max_fold (drops the extreme tail)."""
    if not 0 <= max_fold < p.n_folds:
        raise ValueError(
            f"max_fold must be in [0, {p.n_folds - 1}], got {max_fold}")
    if len(p.assignments) != len(d.records):
        raise ValueError("partition does not match dataset size")
    kept = tuple(r for r, f in zip(d.records, p.assignments) if f <= max_fold)
    removed = [r.id for r, f in zip(d.records, p.assignments) if f > max_fold]
    step = {"step": "truncate_to_fold", "max_fold": max_fold,
            "removed": len(removed), "kept": len(kept), "removed_ids": removed}
    return d.with_step(step, kept)
