import csv
import json
import os

import numpy as np
import pytest

from gwpkan.cli import main
from gwpkan.symbolic import GWP_SYMBOLS

from conftest import write_csv

FLOW_HEADER = ["id", "chemical_name", "smiles", "process_title",
               "process_description", "location", "gwp"]


def run(*argv) -> int:
    return main(list(argv))


def run_stages(config, *stages):
    for stage in stages:
        code = run(stage, "--config", config)
        assert code == 0, f"stage {stage} exited {code}"


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path, make_config):
        cfg = json.load(open(make_config()))
        cfg["learning_rte"] = 0.1
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(cfg))
        assert run("preprocess", "--config", str(bad)) == 2

    def test_unknown_nested_key_rejected(self, tmp_path, make_config):
        cfg = json.load(open(make_config()))
        cfg["model"]["hidden_wdith"] = 4
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(cfg))
        assert run("train", "--config", str(bad)) == 2

    def test_missing_config_file(self, tmp_path):
        assert run("preprocess", "--config", str(tmp_path / "nope.json")) == 2


class TestPreprocess:
    def test_market_rows_excluded(self, tmp_path, make_config):
        rows = [
            ["a", "x", "C", "market for x", "d", "Global", "1.0"],
            ["b", "x", "C", "market for y", "d", "Global", "2.0"],
            ["c", "x", "C", "making x", "d", "Global", "3.0"],
            ["d", "x", "C", "making y", "d", "Global", "4.0"],
            ["e", "x", "C", "making z", "d", "Global", "5.0"],
        ]
        flows = write_csv(tmp_path / "flows.csv", FLOW_HEADER, rows)
        config = make_config(flows_csv=flows)
        assert run("preprocess", "--config", config) == 0
        out = json.load(open(json.load(open(config))["output_dir"]
                             + "/dataset.json"))
        assert len(out["records"]) == 3
        report = json.load(open(json.load(open(config))["output_dir"]
                                + "/preprocess_report.json"))
        market_step = [s for s in report["steps"]
                       if s["step"] == "exclude_market"][0]
        assert market_step["removed"] == 2

    def test_ethanol_table_fixture(self, fixtures_dir, make_config):
        # the published ethanol table lists 11 entries of which 2 are market
        flows = os.path.join(fixtures_dir, "flows_ethanol.csv")
        config = make_config(flows_csv=flows)
        assert run("preprocess", "--config", config) == 0
        out = json.load(open(json.load(open(config))["output_dir"]
                             + "/dataset.json"))
        assert len(out["records"]) == 9

    def test_missing_file_exit_2_names_path(self, tmp_path, make_config, capsys):
        config = make_config(flows_csv=str(tmp_path / "absent.csv"))
        assert run("preprocess", "--config", config) == 2
        assert "absent.csv" in capsys.readouterr().err


class TestStageChain:
    def test_missing_upstream_artifact_exit_3(self, make_config):
        config = make_config()
        assert run("embed", "--config", config) == 3
        assert run("train", "--config", config) == 3
        assert run("report", "--config", config) == 3

    def test_reduce_widths_match_config(self, make_config):
        config = make_config()
        run_stages(config, "preprocess", "embed", "reduce")
        out_dir = json.load(open(config))["output_dir"]
        dims = json.load(open(config))["pca_dims"]
        for fld in ("title", "description", "location"):
            with open(f"{out_dir}/reduced_{fld}.csv") as fh:
                header = next(csv.reader(fh))
            assert len(header) - 1 == dims[fld]

    def test_train_epochs_zero_keeps_initialization(self, make_config):
        config = make_config(model={"epochs": 0})
        run_stages(config, "preprocess", "embed", "reduce", "select", "train")
        out_dir = json.load(open(config))["output_dir"]
        model = json.load(open(f"{out_dir}/model.json"))
        from gwpkan.kan import KanNetwork
        cfg = json.load(open(config))
        net = KanNetwork.from_dict(model["network"])
        n_in = len(model["feature_columns"])
        fresh = KanNetwork.create(
            [n_in, cfg["model"]["hidden_width"], 1],
            grid_intervals=cfg["model"]["grid_intervals"],
            spline_order=cfg["model"]["spline_order"], seed=cfg["seed"])
        assert net.params_digest() == fresh.params_digest()


class TestPredict:
    def _symbol_csv(self, tmp_path, rows, name="symbols.csv"):
        header = ["id"] + list(GWP_SYMBOLS)
        return write_csv(tmp_path / name, header, rows)

    def test_paper_formula_all_zero_row(self, tmp_path, make_config):
        table = self._symbol_csv(tmp_path, [["z"] + [0.0] * 11])
        config = make_config()
        out = tmp_path / "pred.csv"
        assert run("predict", "--config", config, "--formula=paper",
                   "--input", table, "--output", str(out)) == 0
        row = next(csv.DictReader(open(out)))
        assert float(row["prediction"]) == -0.094409
        assert row["predictor"] == "paper"

    def test_paper_formula_carbon_row(self, tmp_path, make_config):
        values = {s: 0.0 for s in GWP_SYMBOLS}
        values["nC"] = 1.0
        table = self._symbol_csv(tmp_path,
                                 [["c"] + [values[s] for s in GWP_SYMBOLS]])
        out = tmp_path / "pred.csv"
        assert run("predict", "--config", make_config(), "--formula=paper",
                   "--input", table, "--output", str(out)) == 0
        row = next(csv.DictReader(open(out)))
        assert abs(float(row["prediction"]) - 0.017734) <= 1e-12

    def test_missing_symbol_column_exit_2(self, tmp_path, make_config, capsys):
        header = ["id"] + [s for s in GWP_SYMBOLS if s != "VE3_A"]
        table = write_csv(tmp_path / "bad.csv", header,
                          [["z"] + [0.0] * 10])
        assert run("predict", "--config", make_config(), "--formula=paper",
                   "--input", table) == 2
        assert "VE3_A" in capsys.readouterr().err

    def test_paper_formula_on_fixture_table(self, make_config):
        config = make_config()
        cfg = json.load(open(config))
        out = cfg["output_dir"] + "/predictions_paper.csv"
        assert run("predict", "--config", config, "--formula=paper") == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 120
        assert all(np.isfinite(float(r["prediction"])) for r in rows)


class TestFullPipeline:
    def test_distill_and_predict_distilled(self, make_config):
        config = make_config(
            model={"epochs": 150},
            distill={"shapes": ["identity", "exp"], "samples_per_edge": 61})
        run_stages(config, "preprocess", "embed", "reduce", "select", "train",
                   "distill")
        out_dir = json.load(open(config))["output_dir"]
        formula = json.load(open(f"{out_dir}/formula.json"))
        assert formula["text"]
        assert run("predict", "--config", config, "--formula=distilled") == 0
        rows = list(csv.DictReader(open(f"{out_dir}/predictions_distilled.csv")))
        assert len(rows) == 117  # market rows removed from the 120

    def test_evaluate_and_report(self, make_config):
        config = make_config(model={"epochs": 100},
                             evaluation={"dim_sweep_candidates": [2, 3]})
        run_stages(config, "preprocess", "embed", "reduce", "select", "train",
                   "evaluate", "report")
        out_dir = json.load(open(config))["output_dir"]
        ev = json.load(open(f"{out_dir}/evaluation.json"))
        assert abs(sum(ev["importance"]["shares"].values()) - 100.0) <= 0.01
        report_dir = f"{out_dir}/report"
        for name in ("learning_curve.csv", "error_bins.csv", "rfecv_curve.csv",
                     "importance_shares.csv", "combo_grid.csv", "dim_sweep.csv",
                     "projection_title.csv", "projection_description.csv",
                     "projection_location.csv"):
            assert os.path.exists(f"{report_dir}/{name}"), name
        with open(f"{report_dir}/combo_grid.csv") as fh:
            header = next(csv.reader(fh))
        assert header[0] == "model"
        assert "Mo+T+D" in header

    def test_manifest_chain_records_digests(self, make_config):
        config = make_config()
        run_stages(config, "preprocess", "embed")
        out_dir = json.load(open(config))["output_dir"]
        manifest = json.load(open(f"{out_dir}/manifest.json"))
        assert set(manifest["stages"]) >= {"preprocess", "embed"}
        pre = manifest["stages"]["preprocess"]
        assert pre["outputs"]["dataset.json"] == \
            manifest["stages"]["embed"]["inputs"]["dataset.json"]
