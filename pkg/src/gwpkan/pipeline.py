"""Pipeline stages behind the CLI: each consumes upstream artifacts by
digest-recorded path, produces its own, and appends to the run manifest.

Artifacts under <output_dir> are deterministic for a fixed config and
inputs; anything timing-related goes to <output_dir>/logs, which stays out
of the digest chain.
"""

from __future__ import annotations

import csv
import hashlib
import os
import re

import numpy as np

from . import data_model as dm
from .artifacts import (Manifest, MissingArtifactError, atomic_write_text,
                        read_json, require, write_json)
from .config import RunConfig
from .descriptors import (FeatureMatrix, FeatureTableError, join_features,
                          load_descriptor_table, read_feature_csv, rfecv,
                          select_columns, write_feature_csv)
from .embeddings import (EmbeddingCache, HttpEmbeddingClient,
                         PseudoEmbeddingClient, embed_texts)
from .estimators import fit_ridge
from .evaluation import (combo_grid, error_bins, learning_curve, metrics,
                         permutation_importance)
from .kan import (BaselineConfig, BaselineNet, KanNetwork, TrainConfig,
                  baseline_net_train, train)
from .pca import fit_pca, pca_transform, projection_2d, sweep_dimensions
from .symbolic import (CandidateLibrary, distill, expr_from_dict, expr_to_dict,
                       eval_expr, print_expr, reference_gwp, reference_gwp_expr,
                       GWP_SYMBOLS, MissingSymbolError)

TEXT_FIELDS = ("title", "description", "location")


class StageError(RuntimeError):
    pass


class PredictInputError(ValueError):
    pass


def _out(cfg: RunConfig, *parts: str) -> str:
    return os.path.join(cfg.resolve(cfg.output_dir), *parts)


def _dataset_to_dict(d: dm.Dataset, p: dm.FoldPartition) -> dict:
    return {
        "source": d.source,
        "provenance": list(d.provenance),
        "partition": {
            "n_folds": p.n_folds,
            "boundaries": list(p.boundaries),
            "assignments": list(p.assignments),
            "empty_folds": list(p.empty_folds),
        },
        "records": [{
            "id": r.id, "chemical_name": r.chemical_name, "smiles": r.smiles,
            "process_title": r.process_title,
            "process_description": r.process_description,
            "location_raw": r.location_raw, "location": r.location,
            "gwp": r.gwp, "is_market": r.is_market,
            "log_target": None if r.log_target is None else
                {"value": r.log_target.value, "source_gwp": r.log_target.source_gwp},
        } for r in d.records],
    }


def _dataset_from_dict(obj: dict) -> tuple[dm.Dataset, dm.FoldPartition]:
    records = tuple(
        dm.FlowRecord(
            id=r["id"], chemical_name=r["chemical_name"], smiles=r["smiles"],
            process_title=r["process_title"],
            process_description=r["process_description"],
            location_raw=r["location_raw"], location=r["location"],
            gwp=r["gwp"], is_market=r["is_market"],
            log_target=None if r["log_target"] is None else
                dm.LogTarget(r["log_target"]["value"], r["log_target"]["source_gwp"]),
        ) for r in obj["records"])
    d = dm.Dataset(records=records, source=obj["source"],
                   provenance=tuple(obj["provenance"]))
    part = obj["partition"]
    p = dm.FoldPartition(n_folds=part["n_folds"],
                         boundaries=tuple(part["boundaries"]),
                         assignments=tuple(part["assignments"]),
                         empty_folds=tuple(part["empty_folds"]))
    return d, p


def load_dataset_artifact(cfg: RunConfig) -> tuple[dm.Dataset, dm.FoldPartition]:
    path = require(_out(cfg, "dataset.json"), "preprocess")
    return _dataset_from_dict(read_json(path))


# -- preprocess ---------------------------------------------------------------

def run_preprocess(cfg: RunConfig) -> dict:
    pre = cfg["preprocess"]
    d = dm.load_flows(cfg.resolve(cfg["flows_csv"]), cfg["schema"] or None)
    n_loaded = len(d)
    if pre["exclude_market"]:
        d = dm.exclude_market(d)
    d, log_report = dm.log_transform(d)
    if not d.records:
        raise StageError("no records left after preprocessing")
    p = dm.partition_log_folds(d, pre["n_folds"])
    if pre["max_fold"] is not None:
        d = dm.truncate_to_fold(d, p, pre["max_fold"])
        p = dm.partition_log_folds(d, pre["n_folds"])
    dataset_path = _out(cfg, "dataset.json")
    write_json(dataset_path, _dataset_to_dict(d, p))
    report = {"loaded": n_loaded, "kept": len(d),
              "steps": list(d.provenance), "log_transform": log_report,
              "empty_folds": list(p.empty_folds)}
    report_path = _out(cfg, "preprocess_report.json")
    write_json(report_path, report)
    Manifest(_out(cfg)).record("preprocess", cfg.digest(),
                               [cfg.resolve(cfg["flows_csv"])],
                               [dataset_path, report_path])
    return report


# -- embed ---------------------------------------------------------------------

def _make_client(cfg: RunConfig):
    emb = cfg["embedding"]
    if emb["mode"] == "pseudo":
        return PseudoEmbeddingClient()
    if not emb["endpoint"]:
        raise StageError("embedding.mode is 'http' but no endpoint configured")
    return HttpEmbeddingClient(endpoint=emb["endpoint"],
                               model_tag=emb["model_tag"],
                               credential_env=emb["credential_env"],
                               timeout=emb["timeout"],
                               max_retries=emb["max_retries"])


def _cache_path(cfg: RunConfig) -> str:
    emb = cfg["embedding"]
    return cfg.resolve(emb["cache_path"]) if emb["cache_path"] \
        else _out(cfg, "embed_cache.jsonl")


def _field_texts(d: dm.Dataset, fld: str) -> list[str]:
    if fld == "title":
        return [r.process_title for r in d.records]
    if fld == "description":
        return [r.process_description for r in d.records]
    return [r.location for r in d.records]


def run_embed(cfg: RunConfig) -> dict:
    d, _ = load_dataset_artifact(cfg)
    client = _make_client(cfg)
    emb = cfg["embedding"]
    os.makedirs(_out(cfg), exist_ok=True)
    cache = EmbeddingCache(_cache_path(cfg))
    index = {"model_tag": client.model_tag, "ids": d.ids(), "fields": {}}
    for fld in TEXT_FIELDS:
        vectors = embed_texts(_field_texts(d, fld), client, cache,
                              batch_size=emb["batch_size"],
                              parallel_batches=emb["parallel_batches"])
        index["fields"][fld] = [v.text_digest for v in vectors]
    index_path = _out(cfg, "embeddings_index.json")
    write_json(index_path, index)
    Manifest(_out(cfg)).record("embed", cfg.digest(),
                               [_out(cfg, "dataset.json")], [index_path])
    return index


def _field_matrix(cfg: RunConfig, index: dict, fld: str) -> FeatureMatrix:
    cache = EmbeddingCache(_cache_path(cfg))
    tag = index["model_tag"]
    rows = []
    for rid, digest in zip(index["ids"], index["fields"][fld]):
        values = cache.get(digest, tag)
        if values is None:
            raise MissingArtifactError(
                f"embedding cache has no vector for record {rid!r} ({fld}); "
                "run 'embed' first")
        rows.append(values)
    from .embeddings import EMBED_DIM
    matrix = np.vstack(rows) if rows else np.zeros((0, EMBED_DIM))
    names = tuple(f"{fld}_e{j}" for j in range(matrix.shape[1]))
    return FeatureMatrix(names, matrix, tuple(index["ids"]), label=fld)


# -- reduce ----------------------------------------------------------------------

def run_reduce(cfg: RunConfig) -> dict:
    index = read_json(require(_out(cfg, "embeddings_index.json"), "embed"))
    dims = cfg["pca_dims"]
    outputs = []
    widths = {}
    for fld in TEXT_FIELDS:
        k = dims[fld]
        full = _field_matrix(cfg, index, fld)
        model = fit_pca(full, k)
        reduced = pca_transform(model, full, prefix=fld)
        csv_path = _out(cfg, f"reduced_{fld}.csv")
        write_feature_csv(reduced, csv_path)
        model_path = _out(cfg, f"pca_{fld}.json")
        write_json(model_path, model.to_dict())
        outputs.extend([csv_path, model_path])
        widths[fld] = reduced.width
    Manifest(_out(cfg)).record("reduce", cfg.digest(),
                               [_out(cfg, "embeddings_index.json")], outputs)
    return widths


# -- select -----------------------------------------------------------------------

def _subset_rows(x: FeatureMatrix, ids: list[str]) -> FeatureMatrix:
    index = {rid: i for i, rid in enumerate(x.row_ids)}
    missing = [rid for rid in ids if rid not in index]
    if missing:
        raise FeatureTableError(
            f"descriptor table {x.label!r} is missing ids {missing[:10]}")
    order = [index[rid] for rid in ids]
    return FeatureMatrix(x.column_names, x.rows[order, :], tuple(ids),
                         label=x.label)


def load_descriptor_parts(cfg: RunConfig, ids: list[str]):
    maccs = _subset_rows(load_descriptor_table(cfg.resolve(cfg["maccs_csv"]),
                                               kind="maccs"), ids)
    mordred = _subset_rows(load_descriptor_table(cfg.resolve(cfg["mordred_csv"]),
                                                 kind="mordred"), ids)
    return maccs, mordred


def run_select(cfg: RunConfig) -> dict:
    d, _ = load_dataset_artifact(cfg)
    maccs, mordred = load_descriptor_parts(cfg, d.ids())
    joined = join_features([maccs, mordred])
    sel_cfg = cfg["rfecv"]
    y = d.log_targets()
    result = rfecv(joined, y, folds=sel_cfg["folds"],
                   step_fraction=sel_cfg["step_fraction"],
                   estimator=sel_cfg["estimator"], seed=cfg.seed,
                   alpha=sel_cfg["alpha"])
    selected = select_columns(joined, result.kept_columns)
    maccs_set = set(maccs.column_names)
    selection = {
        "chosen_count": result.chosen_count,
        "kept_columns": list(result.kept_columns),
        "kept_maccs": [c for c in result.kept_columns if c in maccs_set],
        "kept_mordred": [c for c in result.kept_columns if c not in maccs_set],
        "score_curve": [list(pt) for pt in result.score_curve],
        "score_stderr": list(result.score_stderr),
    }
    sel_path = _out(cfg, "selection.json")
    write_json(sel_path, selection)
    curve_path = _out(cfg, "rfecv_curve.csv")
    _write_csv(curve_path, ["feature_count", "mean_neg_mse", "stderr"],
               [(c, s, e) for (c, s), e in
                zip(result.score_curve, result.score_stderr)])
    feat_path = _out(cfg, "selected_features.csv")
    write_feature_csv(selected, feat_path)
    Manifest(_out(cfg)).record(
        "select", cfg.digest(),
        [_out(cfg, "dataset.json"), cfg.resolve(cfg["maccs_csv"]),
         cfg.resolve(cfg["mordred_csv"])],
        [sel_path, curve_path, feat_path])
    return selection


# -- shared feature assembly ---------------------------------------------------

def assemble_features(cfg: RunConfig) -> FeatureMatrix:
    """Selected descriptors + reduced text embeddings, aligned to the dataset."""
    sel = require(_out(cfg, "selected_features.csv"), "select")
    parts = [read_feature_csv(sel, label="descriptors")]
    for fld in TEXT_FIELDS:
        path = require(_out(cfg, f"reduced_{fld}.csv"), "reduce")
        parts.append(read_feature_csv(path, label=fld))
    return join_features(parts)


def _holdout_indices(n: int, fraction: float, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n)
    return order[:int(round(fraction * n))]


# -- train -----------------------------------------------------------------------

def run_train(cfg: RunConfig) -> dict:
    d, _ = load_dataset_artifact(cfg)
    features = assemble_features(cfg)
    if list(features.row_ids) != d.ids():
        raise StageError("feature artifacts are not aligned with dataset.json; "
                         "re-run select/reduce")
    x = features.rows
    y = np.asarray(d.log_targets())
    mc = cfg["model"]
    kind = mc["kind"]
    model_obj: dict = {"kind": kind,
                       "feature_columns": list(features.column_names)}
    timing = {}
    if kind == "kan":
        net = KanNetwork.create(
            [x.shape[1], mc["hidden_width"], 1],
            grid_intervals=mc["grid_intervals"], spline_order=mc["spline_order"],
            grid_range=tuple(mc["grid_range"]),
            hidden_grid_range=tuple(mc["hidden_grid_range"]), seed=cfg.seed)
        net.config_digest = cfg.digest()
        tc = TrainConfig(seed=cfg.seed, epochs=mc["epochs"],
                         batch_size=mc["batch_size"],
                         learning_rate=mc["learning_rate"],
                         weight_decay=mc["weight_decay"],
                         l1_weight=mc["l1_weight"],
                         validation_fraction=mc["validation_fraction"],
                         patience=mc["patience"])
        net, report = train(net, x, y, tc)
        model_obj["network"] = net.to_dict()
        model_obj["holdout_ids"] = [features.row_ids[i] for i in report.val_indices]
        model_obj["training"] = {"train_losses": report.train_losses,
                                 "val_losses": report.val_losses,
                                 "stopped_early": report.stopped_early,
                                 "final_snapshot_id": report.final_snapshot_id}
        timing["wall_seconds"] = report.wall_seconds
    elif kind == "ridge":
        holdout = _holdout_indices(x.shape[0], mc["validation_fraction"], cfg.seed)
        train_mask = np.ones(x.shape[0], dtype=bool)
        train_mask[holdout] = False
        ridge = fit_ridge(x[train_mask], y[train_mask], alpha=cfg["rfecv"]["alpha"])
        model_obj["ridge"] = {"coef": ridge.coef.tolist(),
                              "intercept": ridge.intercept,
                              "mean": ridge.mean.tolist(),
                              "scale": ridge.scale.tolist()}
        model_obj["holdout_ids"] = [features.row_ids[i] for i in holdout]
    elif kind == "baseline":
        bc = BaselineConfig(seed=cfg.seed, epochs=mc["epochs"],
                            batch_size=mc["batch_size"],
                            learning_rate=mc["learning_rate"],
                            weight_decay=mc["weight_decay"],
                            validation_fraction=mc["validation_fraction"],
                            patience=mc["patience"])
        model = baseline_net_train(x, y, bc)
        holdout = _holdout_indices(x.shape[0], mc["validation_fraction"], cfg.seed)
        model_obj["baseline"] = {
            "hidden": bc.hidden,
            "weights": {name: arr.tolist() for name, arr in
                        zip(("w1", "b1", "w2", "b2", "w3", "b3"), model.params())},
            "x_mean": model.x_mean.tolist(), "x_scale": model.x_scale.tolist()}
        model_obj["holdout_ids"] = [features.row_ids[i] for i in holdout]
    else:
        raise StageError(f"unknown model kind {kind!r}")
    model_path = _out(cfg, "model.json")
    write_json(model_path, model_obj)
    if timing:
        os.makedirs(_out(cfg, "logs"), exist_ok=True)
        write_json(_out(cfg, "logs", "train_timing.json"), timing)
    Manifest(_out(cfg)).record(
        "train", cfg.digest(),
        [_out(cfg, "dataset.json"), _out(cfg, "selected_features.csv")],
        [model_path])
    return {"kind": kind, "features": x.shape[1], "rows": x.shape[0]}


def load_model_artifact(cfg: RunConfig):
    obj = read_json(require(_out(cfg, "model.json"), "train"))
    kind = obj["kind"]
    if kind == "kan":
        return obj, KanNetwork.from_dict(obj["network"])
    if kind == "ridge":
        from .estimators import RidgeModel
        r = obj["ridge"]
        return obj, RidgeModel(np.asarray(r["coef"]), r["intercept"],
                               np.asarray(r["mean"]), np.asarray(r["scale"]))
    if kind == "baseline":
        b = obj["baseline"]
        net = BaselineNet(len(b["x_mean"]), b["hidden"], 0)
        for name, arr in zip(("w1", "b1", "w2", "b2", "w3", "b3"), net.params()):
            arr[:] = np.asarray(b["weights"][name])
        net.x_mean = np.asarray(b["x_mean"])
        net.x_scale = np.asarray(b["x_scale"])
        return obj, net
    raise StageError(f"model.json has unknown kind {kind!r}")


# -- evaluate ----------------------------------------------------------------------

def _trainer_for(name: str, cfg: RunConfig):
    mc = cfg["model"]
    if name == "ridge":
        alpha = cfg["rfecv"]["alpha"]
        return lambda x, y, seed: fit_ridge(x, y, alpha=alpha)
    if name == "baseline":
        def train_baseline(x, y, seed):
            bc = BaselineConfig(seed=seed, epochs=mc["epochs"],
                                batch_size=mc["batch_size"],
                                learning_rate=mc["learning_rate"],
                                validation_fraction=mc["validation_fraction"],
                                patience=mc["patience"])
            return baseline_net_train(x, y, bc)
        return train_baseline
    if name == "kan":
        def train_kan(x, y, seed):
            net = KanNetwork.create(
                [x.shape[1], mc["hidden_width"], 1],
                grid_intervals=mc["grid_intervals"],
                spline_order=mc["spline_order"],
                grid_range=tuple(mc["grid_range"]),
                hidden_grid_range=tuple(mc["hidden_grid_range"]), seed=seed)
            tc = TrainConfig(seed=seed, epochs=mc["epochs"],
                             batch_size=mc["batch_size"],
                             learning_rate=mc["learning_rate"],
                             weight_decay=mc["weight_decay"],
                             l1_weight=mc["l1_weight"],
                             validation_fraction=mc["validation_fraction"],
                             patience=mc["patience"])
            net, _ = train(net, x, y, tc)
            return net
        return train_kan
    raise StageError(f"unknown combo model {name!r}")


def run_evaluate(cfg: RunConfig) -> dict:
    d, part = load_dataset_artifact(cfg)
    features = assemble_features(cfg)
    model_obj, model = load_model_artifact(cfg)
    selection = read_json(require(_out(cfg, "selection.json"), "select"))
    y = np.asarray(d.log_targets())
    ev = cfg["evaluation"]

    holdout_ids = set(model_obj.get("holdout_ids", []))
    idx = [i for i, rid in enumerate(features.row_ids) if rid in holdout_ids]
    in_sample = not idx
    eval_idx = np.asarray(idx if idx else range(len(y)), dtype=int)
    pred = model.predict(features.rows[eval_idx])
    m = metrics(pred, y[eval_idx])

    all_pred = model.predict(features.rows)
    bins = error_bins(all_pred, y, width=ev["error_bin_width"])

    groups = {
        "Ma": selection["kept_maccs"],
        "Mo": selection["kept_mordred"],
        "T": [c for c in features.column_names if c.startswith("title_pc")],
        "D": [c for c in features.column_names if c.startswith("description_pc")],
        "L": [c for c in features.column_names if c.startswith("location_pc")],
    }
    groups = {g: cols for g, cols in groups.items() if cols}
    importance = permutation_importance(model, features, y, groups,
                                        repeats=ev["importance_repeats"],
                                        seed=cfg.seed)

    curve = learning_curve(d, part, features.rows, _trainer_for("ridge", cfg),
                           seed=cfg.seed, min_rows=ev["learning_min_rows"],
                           test_fraction=ev["test_fraction"])

    grid_out = None
    if ev["combos"]:
        parts = {}
        if selection["kept_maccs"]:
            parts["Ma"] = select_columns(features, selection["kept_maccs"])
        if selection["kept_mordred"]:
            parts["Mo"] = select_columns(features, selection["kept_mordred"])
        for label, fld in (("T", "title"), ("D", "description"), ("L", "location")):
            cols = [c for c in features.column_names if c.startswith(f"{fld}_pc")]
            if cols:
                parts[label] = select_columns(features, cols)
        models = {name: _trainer_for(name, cfg) for name in ev["combo_models"]}
        grid = combo_grid(parts, y, models, ev["combos"], seed=cfg.seed,
                          test_fraction=ev["test_fraction"])
        grid_out = {"models": list(grid.models), "combos": list(grid.combos),
                    "cells": {f"{mn}|{cb}": cell
                              for (mn, cb), cell in grid.cells.items()},
                    "split": grid.split}

    evaluation = {
        "metrics": dict(m.to_dict(), in_sample=in_sample, n_eval=int(eval_idx.size)),
        "error_bins": {"edges": list(bins.edges), "counts": list(bins.counts),
                       "mae": list(bins.mae), "variance": list(bins.variance),
                       "empty_bins": list(bins.empty_bins),
                       "includes_training_rows": True},
        "importance": {"shares": importance.group_shares,
                       "repeats": importance.repeats, "seed": importance.seed,
                       "method": importance.method,
                       "per_feature": list(importance.per_feature)},
        "learning_curve": {"points": list(curve.points),
                           "skipped": list(curve.skipped)},
        "combo_grid": grid_out,
    }
    eval_path = _out(cfg, "evaluation.json")
    write_json(eval_path, evaluation)
    curve_path = _out(cfg, "learning_curve.csv")
    _write_csv(curve_path, ["fold_count", "cumulative_data_fraction", "test_r2"],
               [(pt["fold_count"], pt["cumulative_data_fraction"], pt["test_r2"])
                for pt in curve.points])
    bins_path = _out(cfg, "error_bins.csv")
    _write_csv(bins_path, ["bin_lo", "bin_hi", "count", "mae", "variance"],
               [(bins.edges[i], bins.edges[i + 1], bins.counts[i], bins.mae[i],
                 bins.variance[i]) for i in range(len(bins.counts))])
    Manifest(_out(cfg)).record(
        "evaluate", cfg.digest(),
        [_out(cfg, "model.json"), _out(cfg, "selected_features.csv")],
        [eval_path, curve_path, bins_path])
    return evaluation


# -- distill -----------------------------------------------------------------------

def sanitize_names(names: list[str]) -> list[str]:
    out = []
    seen = set()
    for name in names:
        clean = re.sub(r"\W", "_", name)
        if not clean or clean[0].isdigit():
            clean = "f_" + clean
        candidate = clean
        n = 1
        while candidate in seen:
            n += 1
            candidate = f"{clean}_{n}"
        seen.add(candidate)
        out.append(candidate)
    return out


def run_distill(cfg: RunConfig) -> dict:
    model_obj, model = load_model_artifact(cfg)
    if model_obj["kind"] != "kan":
        raise StageError("distill requires a spline-edge (kan) model artifact")
    features = assemble_features(cfg)
    dc = cfg["distill"]
    lib = CandidateLibrary(tuple(dc["shapes"])) if dc["shapes"] else CandidateLibrary()
    names = sanitize_names(list(features.column_names))
    result = distill(model, lib, features.rows, samples_per_edge=dc["samples_per_edge"],
                     r2_floor=dc["r2_floor"], feature_names=names)
    text = print_expr(result.expr)
    formula = {
        "text": text,
        "ast": expr_to_dict(result.expr),
        "global_r2": result.global_r2,
        "zero_variance": result.zero_variance,
        "low_fit_edges": [list(e) for e in result.low_fit_edges],
        "edge_fits": [{
            "layer": f.layer, "out": f.out_idx, "in": f.in_idx,
            "shape": f.shape, "r2": f.r2, "params": list(f.params),
            "low_fit": f.low_fit,
        } for f in result.edge_fits],
        "feature_names": dict(zip(names, features.column_names)),
    }
    json_path = _out(cfg, "formula.json")
    write_json(json_path, formula)
    txt_path = _out(cfg, "formula.txt")
    atomic_write_text(txt_path, text + "\n")
    Manifest(_out(cfg)).record("distill", cfg.digest(),
                               [_out(cfg, "model.json")], [json_path, txt_path])
    return formula


# -- predict -----------------------------------------------------------------------

def _read_symbol_table(path: str) -> tuple[list[str], list[dict]]:
    """ids + per-row bindings for the published formula's eleven symbols."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise PredictInputError(f"cannot read descriptor table {path!r}: {exc}") \
            from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [s for s in GWP_SYMBOLS if s not in header]
        if missing:
            raise PredictInputError(
                f"{path}: missing formula descriptor column(s) {missing}")
        ids, rows = [], []
        id_col = header[0]
        for row_no, row in enumerate(reader, start=2):
            try:
                rows.append({s: float(row[s]) for s in GWP_SYMBOLS})
            except ValueError:
                raise PredictInputError(
                    f"{path}: row {row_no}: non-numeric descriptor cell") from None
            ids.append(row[id_col])
    return ids, rows


def run_predict(cfg: RunConfig, formula: str, input_csv: str | None = None,
                output_csv: str | None = None) -> str:
    out_path = output_csv or _out(cfg, f"predictions_{formula}.csv")
    if formula == "paper":
        source = input_csv or cfg.resolve(cfg["mordred_csv"])
        ids, rows = _read_symbol_table(source)
        digest = hashlib.sha256(
            print_expr(reference_gwp_expr()).encode()).hexdigest()[:16]
        try:
            preds = [reference_gwp(r) for r in rows]
        except MissingSymbolError as exc:
            raise PredictInputError(str(exc)) from exc
        _write_csv(out_path, ["id", "prediction", "predictor", "formula_digest"],
                   [(rid, p, "paper", digest) for rid, p in zip(ids, preds)])
    elif formula == "distilled":
        formula_obj = read_json(require(_out(cfg, "formula.json"), "distill"))
        expr = expr_from_dict(formula_obj["ast"])
        features = assemble_features(cfg)
        names = sanitize_names(list(features.column_names))
        digest = hashlib.sha256(formula_obj["text"].encode()).hexdigest()[:16]
        preds = []
        for r in range(features.rows.shape[0]):
            bindings = {names[i]: float(features.rows[r, i])
                        for i in range(features.width)}
            preds.append(eval_expr(expr, bindings))
        _write_csv(out_path, ["id", "prediction", "predictor", "formula_digest"],
                   [(rid, p, "distilled", digest)
                    for rid, p in zip(features.row_ids, preds)])
    elif formula == "model":
        model_obj, model = load_model_artifact(cfg)
        features = assemble_features(cfg)
        if list(features.column_names) != model_obj["feature_columns"]:
            raise StageError("feature columns do not match the trained model")
        preds = model.predict(features.rows)
        digest = model_obj.get("kind", "model")
        _write_csv(out_path, ["id", "prediction", "predictor", "formula_digest"],
                   [(rid, float(p), model_obj["kind"], digest)
                    for rid, p in zip(features.row_ids, preds)])
    else:
        raise PredictInputError(
            f"unknown --formula {formula!r}; expected paper, distilled, or model")
    Manifest(_out(cfg)).record(f"predict_{formula}", cfg.digest(), [], [out_path])
    return out_path


# -- report ------------------------------------------------------------------------

def run_report(cfg: RunConfig) -> str:
    evaluation = read_json(require(_out(cfg, "evaluation.json"), "evaluate"))
    report_dir = _out(cfg, "report")
    os.makedirs(report_dir, exist_ok=True)
    outputs = []

    for name in ("learning_curve.csv", "error_bins.csv", "rfecv_curve.csv"):
        src = require(_out(cfg, name),
                      "evaluate" if name != "rfecv_curve.csv" else "select")
        with open(src, "r", encoding="utf-8") as fh:
            atomic_write_text(os.path.join(report_dir, name), fh.read())
        outputs.append(os.path.join(report_dir, name))

    shares = evaluation["importance"]["shares"]
    imp_path = os.path.join(report_dir, "importance_shares.csv")
    _write_csv(imp_path, ["group", "share_percent"], sorted(shares.items()))
    outputs.append(imp_path)

    if evaluation.get("combo_grid"):
        grid = evaluation["combo_grid"]
        grid_path = os.path.join(report_dir, "combo_grid.csv")
        rows = []
        for mn in grid["models"]:
            rows.append([mn] + [grid["cells"][f"{mn}|{cb}"]["r2"]
                                for cb in grid["combos"]])
        _write_csv(grid_path, ["model"] + list(grid["combos"]), rows)
        outputs.append(grid_path)

    d, _ = load_dataset_artifact(cfg)
    index = read_json(require(_out(cfg, "embeddings_index.json"), "embed"))
    labels = [r.location for r in d.records]
    for fld in TEXT_FIELDS:
        full = _field_matrix(cfg, index, fld)
        proj = projection_2d(full, labels)
        proj_path = os.path.join(report_dir, f"projection_{fld}.csv")
        _write_csv(proj_path, ["id", "pc0", "pc1", "label"],
                   [(p["id"], p["pc0"], p["pc1"], p["label"]) for p in proj])
        outputs.append(proj_path)

    candidates = cfg["evaluation"]["dim_sweep_candidates"]
    if candidates:
        from .pca import PcaError

        y = d.log_targets()
        rows = []
        for fld in TEXT_FIELDS:
            full = _field_matrix(cfg, index, fld)
            scores = {}
            for dim in candidates:
                # a field with few distinct texts may not support every dim
                try:
                    sweep = sweep_dimensions(full, y, [dim],
                                             folds=min(cfg["rfecv"]["folds"], 5),
                                             seed=cfg.seed)
                    scores[dim] = sweep.scores[0]
                except PcaError:
                    scores[dim] = None
            valid = {k: v for k, v in scores.items() if v is not None}
            best = min((k for k in valid if valid[k] == max(valid.values())),
                       default=None)
            for dim in candidates:
                rows.append((fld, dim,
                             "" if scores[dim] is None else scores[dim],
                             dim == best))
        sweep_path = os.path.join(report_dir, "dim_sweep.csv")
        _write_csv(sweep_path, ["field", "dim", "mean_cv_r2", "best"], rows)
        outputs.append(sweep_path)

    Manifest(_out(cfg)).record("report", cfg.digest(),
                               [_out(cfg, "evaluation.json")], outputs)
    return report_dir


def _write_csv(path: str, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v
                             for v in row])
    os.replace(tmp, path)
