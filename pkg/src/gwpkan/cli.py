"""Command-line front end: one subcommand per pipeline stage, driven by a
single strict JSON config.

Exit codes: 0 success, 2 input error (config/CSV problems), 3 missing
upstream artifact, 4 stage failure (the module's error message is printed
verbatim).
"""

from __future__ import annotations

import argparse
import sys

from .artifacts import MissingArtifactError
from .config import ConfigError, load_config
from .data_model import IngestError
from .descriptors import FeatureTableError
from . import pipeline

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_STAGE_FAILURE = 4

_STAGES = {
    "preprocess": pipeline.run_preprocess,
    "embed": pipeline.run_embed,
    "reduce": pipeline.run_reduce,
    "select": pipeline.run_select,
    "train": pipeline.run_train,
    "evaluate": pipeline.run_evaluate,
    "distill": pipeline.run_distill,
    "report": pipeline.run_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwpkan",
        description="Process-informed GWP prediction pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--config", required=True, help="path to the run config JSON")
    p = sub.add_parser("predict", help="write predictions for a chosen predictor")
    p.add_argument("--config", required=True)
    p.add_argument("--formula", required=True,
                   choices=("paper", "distilled", "model"))
    p.add_argument("--input", default=None,
                   help="descriptor CSV for --formula=paper (default: mordred_csv)")
    p.add_argument("--output", default=None, help="predictions CSV path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "predict":
            out = pipeline.run_predict(cfg, args.formula, args.input, args.output)
            print(f"predict: wrote {out}")
        else:
            _STAGES[args.command](cfg)
            print(f"{args.command}: ok")
    except (ConfigError, IngestError, FeatureTableError,
            pipeline.PredictInputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MissingArtifactError as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except Exception as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
