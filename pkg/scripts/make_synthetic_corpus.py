#!/usr/bin/env python3
"""Generate a synthetic book corpus with planted, recoverable damage.

Two corpus kinds:

  golden   N works, each present as a heavily and a lightly corrupted scan
           of the same clean text.  Ships truth/ texts and golden_pairs.csv,
           so every pipeline stage (through eval-corrections and
           golden-eval) has something to chew on.

  dedup    25 works at one to three scans each, plus five anthologies
           concatenating pairs of works — the cluster-and-filter stress
           corpus.

Both kinds write books/, metadata.csv, and a ready-to-run config.toml into
--out, so the next step is simply:

    bookclean ingest --config <out>/config.toml
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bookclean import synth

CONFIG_TEMPLATE = """\
[paths]
corpus_dir = "books"
metadata = "metadata.csv"
out_dir = "out"
{extra_paths}
[scoring]
scorer = "{scorer}"

[run]
seed = {seed}
"""


def write_config(out_dir: Path, scorer: str, seed: int, with_truth: bool) -> None:
    extra = ""
    if with_truth:
        extra = 'truth_dir = "truth"\ngolden_pairs = "golden_pairs.csv"\n'
    (out_dir / "config.toml").write_text(
        CONFIG_TEMPLATE.format(extra_paths=extra, scorer=scorer, seed=seed),
        "utf-8",
    )


def build_golden(args: argparse.Namespace) -> dict:
    pairs = synth.make_golden_corpus(
        n_works=args.works,
        tokens_per_work=args.tokens,
        heavy_rate=args.heavy_rate,
        light_rate=args.light_rate,
        seed=args.seed,
    )
    metas = {m.book_id: m for m in synth.golden_metadata(pairs)}
    books = []
    truth = {}
    golden = []
    for pair in pairs:
        books.append((metas[pair.heavy_id], pair.heavy_text()))
        books.append((metas[pair.light_id], pair.light_text()))
        truth[pair.heavy_id] = pair.clean_text()
        truth[pair.light_id] = pair.clean_text()
        golden.append((pair.light_id, pair.heavy_id))
    synth.write_corpus_dir(args.out, books, truth=truth, golden_pairs=golden)
    write_config(args.out, args.scorer, args.seed, with_truth=True)
    events = sum(len(p.heavy_events) + len(p.light_events) for p in pairs)
    return {"books": len(books), "works": len(pairs), "planted_errors": events}


def build_dedup(args: argparse.Namespace) -> dict:
    books, groups, anthologies = synth.make_dedup_corpus(
        seed=args.seed, tokens_per_work=args.tokens
    )
    synth.write_corpus_dir(args.out, books)
    write_config(args.out, args.scorer, args.seed, with_truth=False)
    return {
        "books": len(books),
        "planted_clusters": len(groups),
        "anthologies": len(anthologies),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("kind", choices=("golden", "dedup"))
    parser.add_argument("--out", type=Path, required=True, help="corpus directory to create")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--works", type=int, default=50, help="golden: number of works")
    parser.add_argument(
        "--tokens", type=int, default=None,
        help="tokens per work (default: 1800 golden, 1500 dedup)",
    )
    parser.add_argument("--heavy-rate", type=float, default=0.02)
    parser.add_argument("--light-rate", type=float, default=0.005)
    parser.add_argument("--scorer", choices=("dict", "ngram"), default="ngram")
    args = parser.parse_args(argv)

    if args.out.exists():
        parser.error(f"{args.out} already exists; refusing to overwrite")
    if args.tokens is None:
        args.tokens = 1800 if args.kind == "golden" else 1500

    summary = build_golden(args) if args.kind == "golden" else build_dedup(args)
    parts = ", ".join(f"{k}={v}" for k, v in summary.items())
    print(f"wrote {args.kind} corpus to {args.out} ({parts})")
    print(f"next: bookclean ingest --config {args.out / 'config.toml'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
