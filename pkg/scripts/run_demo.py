#!/usr/bin/env python3
"""End-to-end walkthrough on a small synthetic corpus.

Generates a golden corpus (default 12 works, two scans each) plus a few
single-copy books for the error-correction stages, then runs every
pipeline stage in order, printing each stage's summary.  Artifacts land
in <workdir>/out; start with inventory.csv and duplicates.jsonl.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bookclean import synth
from bookclean.cli import main as bookclean
from bookclean.corpus import BookMeta, Digitizer

STAGES = (
    "ingest", "dedup", "align", "rate", "canonical", "export-training",
    "detect", "correct", "eval-corrections", "analyze", "golden-eval",
)

CONFIG = """\
[paths]
corpus_dir = "books"
metadata = "metadata.csv"
out_dir = "out"
truth_dir = "truth"
golden_pairs = "golden_pairs.csv"

[scoring]
scorer = "ngram"

[run]
seed = {seed}
"""


def build_corpus(workdir: Path, works: int, seed: int) -> int:
    pairs = synth.make_golden_corpus(n_works=works, tokens_per_work=1200, seed=seed)
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

    # A handful of books that exist as one damaged scan only, so the
    # detect / correct / eval-corrections stages have work to do.
    solos = synth.make_golden_corpus(
        n_works=max(3, works // 4), tokens_per_work=1200, seed=seed + 1
    )
    for k, pair in enumerate(solos):
        meta = BookMeta(
            book_id=f"solo{k:03d}",
            title=f"Lone story {k}",
            author=f"Solo Author {k}",
            pub_year=1870 + k,
            source_library="nyp",
            digitizer=Digitizer.LOCAL,
        )
        books.append((meta, pair.heavy_text()))
        truth[meta.book_id] = pair.clean_text()

    synth.write_corpus_dir(workdir, books, truth=truth, golden_pairs=golden)
    (workdir / "config.toml").write_text(CONFIG.format(seed=seed), "utf-8")
    return len(solos)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", type=Path, default=Path("demo"))
    parser.add_argument("--works", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if args.workdir.exists():
        parser.error(f"{args.workdir} already exists; refusing to overwrite")
    n_solo = build_corpus(args.workdir, args.works, args.seed)
    print(
        f"corpus: {2 * args.works} scans of {args.works} works "
        f"+ {n_solo} single-copy books in {args.workdir}"
    )

    config_path = str(args.workdir / "config.toml")
    for stage in STAGES:
        print(f"{stage:>16}: ", end="", flush=True)
        code = bookclean([stage, "--config", config_path])
        if code != 0:
            return code
    print(f"artifacts: {args.workdir / 'out'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
