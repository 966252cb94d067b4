"""Command-line entry point.

Exit codes: 0 on success, 1 for usage or configuration problems, 2 when a
stage's input data (corpus files or upstream artifacts) is missing or bad.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Sequence

from . import pipeline
from .config import ConfigError, PipelineConfig, load_config
from .corpus import CorpusError
from .external import ExternalScorerError

_STAGES: dict[str, Callable[[PipelineConfig], dict]] = {
    "ingest": pipeline.run_ingest,
    "dedup": pipeline.run_dedup,
    "align": pipeline.run_align,
    "rate": pipeline.run_rate,
    "canonical": pipeline.run_canonical,
    "export-training": pipeline.run_export_training,
    "detect": pipeline.run_detect,
    "correct": pipeline.run_correct,
    "eval-corrections": pipeline.run_eval_corrections,
    "analyze": pipeline.run_analyze,
    "golden-eval": pipeline.run_golden_eval,
}

_STAGE_HELP = {
    "ingest": "load and validate the corpus; report skipped books",
    "dedup": "group duplicate scans and flag anthologies",
    "align": "align duplicate pairs and extract differing sentences",
    "rate": "score differing sentences and pick likely correct readings",
    "canonical": "choose the best copy of each duplicated work",
    "export-training": "write marked training examples and the mined error table",
    "detect": "locate likely errors in single-copy books",
    "correct": "propose and apply repairs in single-copy books",
    "eval-corrections": "score applied repairs against known-good texts",
    "analyze": "write per-library and per-year quality tables",
    "golden-eval": "measure copy-choice accuracy on labelled pairs",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="bookclean", description="Clean and deduplicate scanned-book corpora.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in _STAGES:
        p = sub.add_parser(name, help=_STAGE_HELP[name])
        p.add_argument("--config", required=True, help="path to the pipeline TOML config")
        p.add_argument("--seed", type=int, help="override [run] seed")
        p.add_argument("--jobs", type=int, help="override [run] jobs")
        p.add_argument(
            "--scorer", choices=["dict", "ngram", "external"], help="override [scoring] scorer"
        )
        p.add_argument("--external-cmd", help="override [scoring] external_cmd")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.jobs is not None:
            config.jobs = args.jobs
        if args.scorer is not None:
            config.scorer = args.scorer
        if args.external_cmd is not None:
            config.external_cmd = args.external_cmd
        config.validate()
    except (UsageError, ConfigError) as exc:
        print(f"bookclean: {exc}", file=sys.stderr)
        return 1

    try:
        result = _STAGES[args.command](config)
    except (pipeline.PipelineError, CorpusError, ExternalScorerError) as exc:
        print(f"bookclean {args.command}: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(result, sort_keys=True))
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
