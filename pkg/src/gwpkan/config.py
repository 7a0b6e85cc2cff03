"""Run configuration: one strict JSON file drives every pipeline stage.

Unknown keys are rejected outright; a typo in a hyperparameter name must
fail loudly instead of silently training with a default. The resolved
config's digest is stamped into every stage manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

__all__ = ["ConfigError", "RunConfig", "load_config", "config_digest"]


class ConfigError(ValueError):
    pass


_ALLOWED: dict = {
    "seed": int,
    "output_dir": str,
    "flows_csv": str,
    "maccs_csv": str,
    "mordred_csv": str,
    "schema": dict,
    "preprocess": {
        "exclude_market": bool,
        "n_folds": int,
        "max_fold": (int, type(None)),
    },
    "embedding": {
        "mode": str,
        "endpoint": str,
        "credential_env": str,
        "model_tag": str,
        "batch_size": int,
        "max_retries": int,
        "timeout": (int, float),
        "parallel_batches": int,
        "cache_path": str,
    },
    "pca_dims": {"title": int, "description": int, "location": int},
    "rfecv": {
        "folds": int,
        "step_fraction": (int, float),
        "estimator": str,
        "alpha": (int, float),
    },
    "model": {
        "kind": str,
        "hidden_width": int,
        "grid_intervals": int,
        "spline_order": int,
        "grid_range": list,
        "hidden_grid_range": list,
        "epochs": int,
        "batch_size": int,
        "learning_rate": (int, float),
        "weight_decay": (int, float),
        "l1_weight": (int, float),
        "validation_fraction": (int, float),
        "patience": int,
    },
    "evaluation": {
        "test_fraction": (int, float),
        "error_bin_width": (int, float),
        "importance_repeats": int,
        "learning_min_rows": int,
        "combo_models": list,
        "combos": list,
        "dim_sweep_candidates": list,
    },
    "distill": {
        "shapes": list,
        "r2_floor": (int, float),
        "samples_per_edge": int,
    },
}

_DEFAULTS = {
    "seed": 0,
    "output_dir": "out",
    "schema": {},
    "preprocess": {"exclude_market": True, "n_folds": 10, "max_fold": None},
    "embedding": {
        "mode": "pseudo",
        "endpoint": "",
        "credential_env": "GWPKAN_EMBED_API_KEY",
        "model_tag": "pseudo-1536",
        "batch_size": 64,
        "max_retries": 3,
        "timeout": 30.0,
        "parallel_batches": 4,
        "cache_path": "",
    },
    "pca_dims": {"title": 40, "description": 60, "location": 10},
    "rfecv": {"folds": 10, "step_fraction": 0.1, "estimator": "ridge", "alpha": 1.0},
    "model": {
        "kind": "kan",
        "hidden_width": 4,
        "grid_intervals": 5,
        "spline_order": 3,
        "grid_range": [-1.0, 1.0],
        "hidden_grid_range": [-2.0, 2.0],
        "epochs": 300,
        "batch_size": 128,
        "learning_rate": 0.01,
        "weight_decay": 0.0,
        "l1_weight": 0.001,
        "validation_fraction": 0.2,
        "patience": 50,
    },
    "evaluation": {
        "test_fraction": 0.2,
        "error_bin_width": 1.0,
        "importance_repeats": 5,
        "learning_min_rows": 10,
        "combo_models": ["ridge"],
        "combos": [],
        "dim_sweep_candidates": [],
    },
    "distill": {"shapes": [], "r2_floor": 0.5, "samples_per_edge": 201},
}

_REQUIRED = ("flows_csv", "maccs_csv", "mordred_csv")


@dataclass(frozen=True)
class RunConfig:
    raw: dict = field(repr=False)
    path: str = ""

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def output_dir(self) -> str:
        return self.raw["output_dir"]

    def digest(self) -> str:
        return config_digest(self.raw)

    def resolve(self, rel_path: str) -> str:
        """Paths in the config are relative to the config file's directory."""
        if not rel_path or os.path.isabs(rel_path):
            return rel_path
        return os.path.normpath(os.path.join(os.path.dirname(self.path) or ".",
                                             rel_path))


def _check_keys(obj: dict, allowed: dict, prefix: str) -> None:
    for key, value in obj.items():
        if key not in allowed:
            raise ConfigError(f"unknown config key {prefix}{key!r}")
        spec = allowed[key]
        if isinstance(spec, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {prefix}{key!r} must be an object")
            _check_keys(value, spec, f"{prefix}{key}.")
        else:
            if not isinstance(value, spec):
                raise ConfigError(
                    f"config key {prefix}{key!r} has wrong type "
                    f"{type(value).__name__}")


def _merged(defaults: dict, override: dict) -> dict:
    out = {}
    for key, value in defaults.items():
        if isinstance(value, dict):
            out[key] = _merged(value, override.get(key, {}))
        else:
            out[key] = override.get(key, value)
    for key, value in override.items():
        if key not in defaults:
            out[key] = value
    return out


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config {path!r} must be a JSON object")
    _check_keys(obj, _ALLOWED, "")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise ConfigError(f"config {path!r} is missing required keys {missing}")
    merged = _merged(_DEFAULTS, obj)
    if merged["embedding"]["mode"] not in ("pseudo", "http"):
        raise ConfigError("embedding.mode must be 'pseudo' or 'http'")
    if merged["model"]["kind"] not in ("kan", "baseline", "ridge"):
        raise ConfigError("model.kind must be 'kan', 'baseline', or 'ridge'")
    return RunConfig(raw=merged, path=path)


def config_digest(resolved: dict) -> str:
    """Digest of the resolved config minus the output location, so the same
    computation written to two directories matches."""
    content = {k: v for k, v in resolved.items() if k != "output_dir"}
    blob = json.dumps(content, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
