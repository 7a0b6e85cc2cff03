"""Acceptance suite: one test per promised behavior, each printing a
PASS/FAIL line with its elapsed time and checked at the stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import csv
import hashlib
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                        "fixtures")


class _Timer:
    def __init__(self, name, limit_s):
        self.name = name
        self.limit_s = limit_s

    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.t0
        if exc_type is None:
            status = "PASS"
        elif exc_type is getattr(pytest.skip, "Exception", None):
            status = "SKIP"
        else:
            status = "FAIL"
        print(f"\nACCEPTANCE {status}: {self.name} ({elapsed:.2f}s, "
              f"limit {self.limit_s}s)")
        if exc_type is None:
            assert elapsed < self.limit_s, \
                f"{self.name} exceeded its runtime limit: {elapsed:.1f}s"
        return False


def test_published_formula_exactness():
    with _Timer("published-formula exactness", 1.0):
        from gwpkan.symbolic import reference_gwp, GWP_SYMBOLS

        zero = {s: 0.0 for s in GWP_SYMBOLS}
        assert reference_gwp(zero) == -0.094409

        carbon = dict(zero, nC=1.0)
        # oracle: independent scalar arithmetic
        assert abs(reference_gwp(carbon) - (112143 / 1e6 - 94409 / 1e6)) <= 1e-12
        assert abs(reference_gwp(carbon) - 0.017734) <= 1e-12

        atoms = dict(zero, nAtom=240.0)
        assert abs(reference_gwp(atoms) - (-0.094409 * math.e)) <= 1e-12


def test_spline_basis_correctness():
    with _Timer("spline basis: partition of unity + independent de Boor", 5.0):
        from gwpkan.kan import SplineGrid, basis_only
        from test_kan_splines import textbook_basis

        grid = SplineGrid(-1.0, 1.0, 5, order=3)
        rng = np.random.default_rng(11)
        xs = rng.uniform(-1.0, 1.0, 1000)
        basis = basis_only(xs, grid)
        assert np.max(np.abs(basis.sum(axis=1) - 1.0)) <= 1e-10

        probe = rng.uniform(-1.0, 1.0, 100)
        probe_basis = basis_only(probe, grid)
        for p, x in enumerate(probe):
            for i in range(grid.n_basis):
                oracle = textbook_basis(float(x), grid.knots, i, grid.order)
                assert abs(probe_basis[p, i] - oracle) <= 1e-12


def test_gradient_check():
    with _Timer("gradient check vs central finite differences", 30.0):
        from gwpkan.kan import KanNetwork, loss_and_grad

        net = KanNetwork.create([2, 4, 1], seed=21)
        rng = np.random.default_rng(22)
        x = rng.uniform(-1.2, 1.2, (16, 2))
        y = rng.normal(0.0, 1.0, 16)
        l1 = 1e-3
        _, grads = loss_and_grad(net, x, y, l1)
        analytic = net.grad_arrays(grads)
        params = net.param_arrays()
        sizes = [p.size for p in params]
        total = sum(sizes)
        picks = rng.choice(total, 100, replace=False)
        h = 1e-5
        for flat_index in picks:
            ai = 0
            while flat_index >= sizes[ai]:
                flat_index -= sizes[ai]
                ai += 1
            arr = params[ai].reshape(-1)
            grad = analytic[ai].reshape(-1)[flat_index]
            old = arr[flat_index]
            arr[flat_index] = old + h
            lp, _ = loss_and_grad(net, x, y, l1)
            arr[flat_index] = old - h
            lm, _ = loss_and_grad(net, x, y, l1)
            arr[flat_index] = old
            fd = (lp - lm) / (2 * h)
            rel = abs(fd - grad) / max(abs(fd), abs(grad), 1e-8)
            assert rel <= 1e-4, f"param {ai}[{flat_index}]: rel error {rel}"


def _capability_trial(seed):
    from gwpkan.estimators import r2_score
    from gwpkan.kan import KanNetwork, TrainConfig, train, prune

    rng = np.random.default_rng(seed + 1000)
    x = rng.uniform(-1, 1, (512, 2))
    y = np.exp(x[:, 0] / 2) + x[:, 1] ** 2
    x_test = rng.uniform(-1, 1, (256, 2))
    y_test = np.exp(x_test[:, 0] / 2) + x_test[:, 1] ** 2

    net = KanNetwork.create([2, 4, 1], seed=seed)
    concentrate = TrainConfig(seed=seed, epochs=2500, batch_size=128,
                              learning_rate=0.01, l1_weight=2e-3,
                              entropy_weight=0.1, validation_fraction=0.15,
                              patience=10 ** 9)
    net, _ = train(net, x, y, concentrate)
    polish = TrainConfig(seed=seed + 1, epochs=800, batch_size=128,
                         learning_rate=0.005, l1_weight=0.0,
                         entropy_weight=0.0, validation_fraction=0.15,
                         patience=200)
    net, _ = train(net, x, y, polish)
    r2_full = r2_score(y_test, net.predict(x_test))
    pruned, _ = prune(net, 0.2, x)
    r2_pruned = r2_score(y_test, pruned.predict(x_test))
    active_hidden = pruned.layer_widths[1]
    return r2_full, r2_pruned, active_hidden


def test_kan_capability_and_pruning():
    with _Timer("network capability on exp(x/2)+y^2 with pruning", 300.0):
        successes = 0
        details = []
        for seed in range(5):
            r2_full, r2_pruned, active = _capability_trial(seed)
            ok = r2_full >= 0.99 and r2_pruned >= 0.99 and active <= 2
            successes += ok
            details.append((seed, round(r2_full, 5), round(r2_pruned, 5),
                            active, ok))
        print(f"  capability trials: {details}")
        assert successes >= 4, details


def test_distillation_recovery():
    with _Timer("distillation recovers exp with tight RMS", 300.0):
        from gwpkan.kan import KanNetwork, TrainConfig, train
        from gwpkan.symbolic import CandidateLibrary, distill
        from gwpkan.symbolic.distill import _eval_rows
        from gwpkan.symbolic.expr import Exp

        def contains_exp(e):
            if isinstance(e, Exp):
                return True
            for attr in ("children",):
                if hasattr(e, attr):
                    return any(contains_exp(c) for c in getattr(e, attr))
            if hasattr(e, "child"):
                return contains_exp(e.child)
            if hasattr(e, "base"):
                return contains_exp(e.base)
            return False

        successes = 0
        details = []
        for seed in range(5):
            rng = np.random.default_rng(seed + 50)
            x = rng.uniform(-1, 1, (512, 1))
            y = np.exp(x[:, 0])
            net = KanNetwork.create([1, 1], grid_intervals=8, seed=seed)
            cfg = TrainConfig(seed=seed, epochs=1800, batch_size=128,
                              learning_rate=0.01, l1_weight=0.0,
                              entropy_weight=0.0, validation_fraction=0.15,
                              patience=300)
            net, _ = train(net, x, y, cfg)
            result = distill(net, CandidateLibrary(), x)
            rms = float(np.sqrt(np.mean(
                (_eval_rows(result.expr, x, ["x0"]) - net.predict(x)) ** 2)))
            ok = (contains_exp(result.expr)
                  and result.edge_fits[0].r2 >= 0.99
                  and rms <= 1e-3)
            successes += ok
            details.append((seed, result.edge_fits[0].shape,
                            round(result.edge_fits[0].r2, 6), rms, ok))
        print(f"  distillation trials: {details}")
        assert successes >= 4, details


def test_rfecv_recovery():
    with _Timer("feature-elimination recovery of informative columns", 120.0):
        from test_descriptors import informative_noise_data
        from gwpkan.descriptors import rfecv

        hits = 0
        for seed in range(10):
            fm, y = informative_noise_data(seed=seed)
            result = rfecv(fm, y, folds=10, step_fraction=0.1, seed=seed)
            hits += {f"inf{i}" for i in range(5)} <= set(result.kept_columns)
        print(f"  recovered informative set in {hits}/10 seeds")
        assert hits >= 9


def test_pca_criteria():
    with _Timer("principal components: reconstruction, orthonormality, sweep", 60.0):
        from gwpkan.descriptors import FeatureMatrix
        from gwpkan.pca import fit_pca, pca_inverse_transform, sweep_dimensions
        from test_pca import rank3_generator

        rng = np.random.default_rng(31)
        rows = rng.normal(0, 1, (40, 12))
        fm = FeatureMatrix(tuple(f"e{j}" for j in range(12)), rows,
                           tuple(str(i) for i in range(40)))
        model = fit_pca(fm, 12)
        reduced = (rows - model.mean) @ model.components.T
        back = pca_inverse_transform(model, reduced)
        assert np.max(np.abs(back - rows)) <= 1e-8
        gram = model.components @ model.components.T
        assert np.max(np.abs(gram - np.eye(12))) <= 1e-8

        fm3, y3 = rank3_generator(seed=0)
        sweep = sweep_dimensions(fm3, y3, [1, 2, 3, 5, 10], folds=5, seed=0)
        assert sweep.best_dim == 3


def test_preprocessing_arithmetic():
    with _Timer("market exclusion counts + log round trip", 1.0):
        from gwpkan.data_model import (Dataset, FlowRecord, exclude_market,
                                       log_transform)

        records = []
        for i in range(2544):
            market = i < 855
            records.append(FlowRecord(
                id=f"r{i}", chemical_name="x", smiles="C",
                process_title="market for x" if market else "making x",
                process_description="d", location_raw="Global",
                gwp=float(1.0 + (i % 97)), is_market=market))
        d = Dataset(records=tuple(records), source="synthetic")
        out = exclude_market(d)
        assert len(out) == 1689
        assert out.provenance[-1]["removed"] == 855

        transformed, _ = log_transform(out)
        for rec in transformed.records[::97]:
            back = 10.0 ** rec.log_target.value
            assert abs(back - rec.gwp) / rec.gwp <= 1e-12


def test_error_bin_bookkeeping():
    with _Timer("error-bin bookkeeping", 1.0):
        from gwpkan.evaluation import error_bins

        rng = np.random.default_rng(41)
        actual = rng.uniform(-3, 7, 10_000)
        pred = actual + rng.normal(0, 0.4, 10_000)
        bins = error_bins(pred, actual, width=1.0)
        assert sum(bins.counts) == 10_000

        two = error_bins([1.5, 1.5], [0.5, 1.5], width=1.0)
        assert two.mae == (1.0, 0.0)


def _run_pipeline(out_dir: str) -> None:
    cfg = json.load(open(os.path.join(FIXTURES, "config.json")))
    cfg["output_dir"] = out_dir
    for key in ("flows_csv", "maccs_csv", "mordred_csv"):
        cfg[key] = os.path.join(FIXTURES, cfg[key])
    cfg_path = out_dir + "_config.json"
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh, indent=2)
    stages = ("preprocess", "embed", "reduce", "select", "train", "evaluate",
              "distill", "report")
    for stage in stages:
        proc = subprocess.run(
            [sys.executable, "-m", "gwpkan.cli", stage, "--config", cfg_path],
            capture_output=True, text=True)
        assert proc.returncode == 0, (stage, proc.stderr)
    proc = subprocess.run(
        [sys.executable, "-m", "gwpkan.cli", "predict", "--config", cfg_path,
         "--formula=paper"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def _artifact_digests(root: str) -> dict:
    out = {}
    for dirpath, _, files in os.walk(root):
        if os.path.basename(dirpath) == "logs":
            continue  # wall-clock timings live here, outside the digest chain
        for name in files:
            path = os.path.join(dirpath, name)
            rel = os.path.relpath(path, root)
            with open(path, "rb") as fh:
                out[rel] = hashlib.sha256(fh.read()).hexdigest()
    return out


def test_end_to_end_determinism(tmp_path):
    with _Timer("end-to-end determinism of the full pipeline", 600.0):
        run_a = str(tmp_path / "run_a")
        run_b = str(tmp_path / "run_b")
        _run_pipeline(run_a)
        _run_pipeline(run_b)
        da = _artifact_digests(run_a)
        db = _artifact_digests(run_b)
        assert da.keys() == db.keys()
        mismatched = [k for k in da if da[k] != db[k]]
        print(f"  {len(da)} artifacts compared")
        assert mismatched == [], mismatched


EXPORTER_FIXTURES = os.path.join(FIXTURES, "exporter")


def test_exporter_conformance():
    with _Timer("descriptor exporter conformance [secondary]", 10.0):
        maccs_path = os.path.join(EXPORTER_FIXTURES, "maccs.csv")
        mordred_path = os.path.join(EXPORTER_FIXTURES, "mordred.csv")
        if not (os.path.exists(maccs_path) and os.path.exists(mordred_path)):
            pytest.skip("exporter fixture output not present; build the "
                        "exporter package and run its export script")
        from gwpkan.descriptors import load_descriptor_table

        maccs = load_descriptor_table(maccs_path, kind="maccs")
        assert maccs.width == 166
        assert maccs.cleaning_report["dropped"] == []
        mordred = load_descriptor_table(mordred_path, kind="mordred")
        assert mordred.cleaning_report["dropped"] == []
        from gwpkan.symbolic import GWP_SYMBOLS
        assert set(GWP_SYMBOLS) <= set(mordred.column_names)

        with open(os.path.join(EXPORTER_FIXTURES, "molecules.csv")) as fh:
            molecules = {row["smiles"]: row["id"]
                         for row in csv.DictReader(fh)}
        ethanol_id = molecules["CCO"]
        benzene_id = molecules["c1ccccc1"]
        # hand-count oracles: CCO has two carbons, benzene six aromatic atoms
        assert mordred.column("nC")[mordred.row_ids.index(ethanol_id)] == 2
        assert mordred.column("nAromAtom")[
            mordred.row_ids.index(benzene_id)] == 6
        assert mordred.column("nAromBond")[
            mordred.row_ids.index(benzene_id)] == 6
