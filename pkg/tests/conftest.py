import json
import os

import pytest

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                        "fixtures")


@pytest.fixture(scope="session")
def fixtures_dir() -> str:
    return FIXTURES


@pytest.fixture()
def make_config(tmp_path):
    """Write a pipeline config into tmp_path pointing at the bundled fixtures."""

    def _make(**overrides):
        cfg = json.load(open(os.path.join(FIXTURES, "config.json")))
        cfg["output_dir"] = str(tmp_path / "out")
        for key in ("flows_csv", "maccs_csv", "mordred_csv"):
            cfg[key] = os.path.join(FIXTURES, cfg[key])
        for key, value in overrides.items():
            if isinstance(value, dict):
                cfg.setdefault(key, {}).update(value)
            else:
                cfg[key] = value
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg, indent=2))
        return str(path)

    return _make


def write_csv(path, header, rows):
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return str(path)
