"""Command line entry point: configure a backend and serve stdio."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import STARTER_MODEL, ConfigError, SidecarConfig
from .protocol import serve
from .starter import StarterBackend
from .transformer import BackendUnavailable, TransformerBackend

__all__ = ["build_backend", "entry", "main"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lmsidecar",
        description="Sentence scorer speaking the NDJSON scorer protocol on stdio.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument(
        "--model",
        default=STARTER_MODEL,
        help=f"'{STARTER_MODEL}' for the built-in statistical model, or a "
             "causal-LM name loadable by transformers (e.g. 'gpt2')",
    )
    p.add_argument("--device", default="auto", help="neural device: auto, cpu, cuda, ...")
    p.add_argument("--batch-size", type=int, default=16, help="max internal score batch")
    p.add_argument(
        "--train", type=Path, default=None, metavar="FILE",
        help="plain-text corpus replacing the bundled one (starter model only)",
    )
    p.add_argument("--no-detect", action="store_true", help="do not serve the detect op")
    p.add_argument("--no-correct", action="store_true", help="do not serve the correct op")
    return p


def build_backend(config: SidecarConfig):
    if config.score_model == STARTER_MODEL:
        return StarterBackend.from_config(config)
    return TransformerBackend.from_config(config)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = SidecarConfig.build(
            args.model,
            detect=False if args.no_detect else None,
            correct=False if args.no_correct else None,
            device=args.device,
            max_batch_size=args.batch_size,
            train_path=args.train,
        )
        backend = build_backend(config)
    except (ConfigError, BackendUnavailable, OSError, ValueError) as exc:
        print(f"lmsidecar: {exc}", file=sys.stderr)
        return 3
    serve(backend, max_batch_size=config.max_batch_size)
    return 0


def entry() -> None:
    sys.exit(main())
