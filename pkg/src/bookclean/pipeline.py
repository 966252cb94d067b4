"""Stage functions behind the command-line interface.

Each stage reads its inputs from the artifact directory, does its work, and
writes artifacts back, so runs are resumable and individually inspectable.
All JSON lines are written with sorted keys and rows in a deterministic
order; two runs over the same corpus produce byte-identical artifacts.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .align import AlignConfig, AlignmentImpossible, DifferenceRecord, GapPair, align_pair, extract_differences
from .analysis import (
    QualityReport,
    SubstitutionTable,
    aggregate_quality,
    mine_substitutions,
    quality_from_detections,
    quality_from_pairs,
    write_quality_csv,
    write_year_csv,
)
from .canonical import BookComparison, CanonicalResult, build_comparison, golden_eval, tournament
from .config import PipelineConfig
from .corpus import Book, CorpusError, CorpusLoad, Token, books_by_id, load_corpus, tokenize
from .dedup import DuplicateSet, cluster_and_filter
from .external import ExternalScorerClient
from .lm import NgramConfig, NgramLM, train_ngram
from .scoring import (
    DictionaryScorer,
    NgramScorer,
    RatedPair,
    Scorer,
    SentenceScore,
    load_lexicon,
    rate_pair,
)
from .singlecopy import (
    ChannelCorrector,
    ChannelDetector,
    CorrectorConfig,
    TrainingExample,
    build_channel,
    correct_book,
    detect,
    evaluate_corrections,
    export_training,
)

__all__ = [
    "PipelineError",
    "artifact_path",
    "require",
    "run_ingest",
    "run_dedup",
    "run_align",
    "run_rate",
    "run_canonical",
    "run_export_training",
    "run_detect",
    "run_correct",
    "run_eval_corrections",
    "run_analyze",
    "run_golden_eval",
]

_ARTIFACTS = {
    "skipped": ("skipped.csv", "ingest"),
    "inventory": ("inventory.csv", "ingest"),
    "duplicates": ("duplicates.jsonl", "dedup"),
    "differences": ("differences.jsonl", "align"),
    "rated": ("rated.jsonl", "rate"),
    "lm": ("lm.pkl", "rate"),
    "canonical": ("canonical.jsonl", "canonical"),
    "train": ("train.jsonl", "export-training"),
    "test": ("test.jsonl", "export-training"),
    "substitutions": ("substitutions.tsv", "export-training"),
    "detections": ("detections.jsonl", "detect"),
    "proposals": ("proposals.jsonl", "correct"),
    "corrected_dir": ("corrected", "correct"),
    "corrections_report": ("corrections_report.csv", "eval-corrections"),
    "quality_library": ("quality_by_library.csv", "analyze"),
    "quality_year": ("quality_by_year.csv", "analyze"),
    "golden": ("golden_eval.txt", "golden-eval"),
}


class PipelineError(RuntimeError):
    """A stage cannot run: an input artifact or file is missing."""

    def __init__(self, message: str, artifact: Path | None = None) -> None:
        super().__init__(message)
        self.artifact = artifact


def artifact_path(config: PipelineConfig, name: str) -> Path:
    filename, _ = _ARTIFACTS[name]
    return config.out_dir / filename


def require(config: PipelineConfig, name: str) -> Path:
    path = artifact_path(config, name)
    if not path.exists():
        _, stage = _ARTIFACTS[name]
        raise PipelineError(
            f"missing artifact {path}; run `bookclean {stage}` first", artifact=path
        )
    return path


def _write_jsonl(path: Path, rows: Iterable[dict]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
            n += 1
    return n


def _read_jsonl(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def _load(config: PipelineConfig) -> CorpusLoad:
    try:
        return load_corpus(config.corpus_dir, config.metadata)
    except CorpusError as exc:
        raise PipelineError(str(exc)) from exc


# -- record serialization ----------------------------------------------------


def record_to_row(record: DifferenceRecord) -> dict:
    return {
        "pair": [record.book_a_id, record.book_b_id],
        "sentence_a": record.sentence_a,
        "sentence_b": record.sentence_b,
        "sent_range_a": list(record.sent_range_a),
        "sent_range_b": list(record.sent_range_b),
        "sent_tokens_a": list(record.sent_tokens_a),
        "sent_tokens_b": list(record.sent_tokens_b),
        "gaps": [
            {
                "a": [g.a_start, g.a_end],
                "b": [g.b_start, g.b_end],
                "tokens_a": list(g.tokens_a),
                "tokens_b": list(g.tokens_b),
            }
            for g in record.gaps
        ],
        "context_before": list(record.context_before),
        "context_after": list(record.context_after),
        "low_confidence": record.low_confidence,
    }


def row_to_record(row: dict) -> DifferenceRecord:
    return DifferenceRecord(
        book_a_id=row["pair"][0],
        book_b_id=row["pair"][1],
        sentence_a=row["sentence_a"],
        sentence_b=row["sentence_b"],
        sent_range_a=tuple(row["sent_range_a"]),
        sent_range_b=tuple(row["sent_range_b"]),
        sent_tokens_a=tuple(row["sent_tokens_a"]),
        sent_tokens_b=tuple(row["sent_tokens_b"]),
        gaps=tuple(
            GapPair(
                g["a"][0], g["a"][1], g["b"][0], g["b"][1],
                tuple(g["tokens_a"]), tuple(g["tokens_b"]),
            )
            for g in row["gaps"]
        ),
        context_before=tuple(row["context_before"]),
        context_after=tuple(row["context_after"]),
        low_confidence=row["low_confidence"],
    )


def rated_to_row(rp: RatedPair) -> dict:
    row = record_to_row(rp.record)
    row.update(
        {
            "ll_a": rp.score_a.normalized_ll,
            "ll_b": rp.score_b.normalized_ll,
            "n_tokens_a": rp.score_a.token_count,
            "n_tokens_b": rp.score_b.token_count,
            "p": rp.p,
            "q": rp.q,
            "winner": rp.winner,
            "tie": rp.tie,
            "scorer_id": rp.score_a.scorer_id,
        }
    )
    return row


def row_to_rated(row: dict) -> RatedPair:
    record = row_to_record(row)
    sid = row["scorer_id"]
    return RatedPair(
        record=record,
        score_a=SentenceScore(row["ll_a"], row["n_tokens_a"], sid),
        score_b=SentenceScore(row["ll_b"], row["n_tokens_b"], sid),
        p=row["p"],
        q=row["q"],
        winner=row["winner"],
        tie=row["tie"],
    )


def _record_sort_key(row: dict):
    return (
        row["pair"][0],
        row["pair"][1],
        row["sent_range_a"][0],
        row["sent_range_b"][0],
        row["gaps"][0]["a"][0] if row["gaps"] else -1,
        row["gaps"][0]["b"][0] if row["gaps"] else -1,
    )


# -- scorers -----------------------------------------------------------------


class _CachingScorer:
    """Serves per-sentence scores from a prefilled text -> score map."""

    def __init__(self, base: Scorer, cache: dict[str, SentenceScore]) -> None:
        self.base = base
        self.cache = cache
        self.scorer_id = base.scorer_id

    def score(self, tokens: Sequence[Token]) -> SentenceScore:
        text = " ".join(t.text for t in tokens)
        hit = self.cache.get(text)
        return hit if hit is not None else self.base.score(tokens)


def make_scorer(config: PipelineConfig, books: Sequence[Book] | None = None) -> Scorer:
    """Build the configured scorer; may train and cache an n-gram model."""
    if config.scorer == "dict":
        return DictionaryScorer(load_lexicon(config.lexicon))
    if config.scorer == "ngram":
        lm = _ngram_model(config, books)
        return NgramScorer(lm)
    return ExternalScorerClient(config.external_cmd, timeout=config.external_timeout)


def _training_books(config: PipelineConfig, load: CorpusLoad) -> list[Book]:
    """Text the n-gram model trains on: books that exist in several copies.

    A single-copy book's errors appear verbatim nowhere else, so training on
    it would teach the model the very readings the channel must reject.
    Falls back to the whole corpus when no dedup artifact exists yet.
    """
    dup_path = artifact_path(config, "duplicates")
    if not dup_path.exists():
        return load.books
    singles: set[str] = set()
    for ds in load_duplicate_sets(config):
        if len(ds.member_book_ids) == 1:
            singles.update(ds.member_book_ids)
    kept = [b for b in load.books if b.book_id not in singles]
    return kept or load.books


def _ngram_model(config: PipelineConfig, books: Sequence[Book] | None) -> NgramLM:
    lm_path = artifact_path(config, "lm")
    if lm_path.exists():
        return NgramLM.load(lm_path)
    if books is None:
        books = _load(config).books
    ncfg = NgramConfig(
        order=config.ngram_order,
        alpha=config.ngram_alpha,
        min_count=config.ngram_min_count,
        smoothing=config.smoothing,
    )
    lm = train_ngram(books, ncfg)
    lm_path.parent.mkdir(parents=True, exist_ok=True)
    lm.save(lm_path)
    return lm


# -- stages ------------------------------------------------------------------


def run_ingest(config: PipelineConfig) -> dict:
    load = _load(config)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(artifact_path(config, "skipped"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["book_id", "reason"])
        for entry in load.skipped:
            writer.writerow([entry.book_id, entry.reason])
    with open(artifact_path(config, "inventory"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["book_id", "tokens", "sentences"])
        for book in sorted(load.books, key=lambda b: b.book_id):
            writer.writerow([book.book_id, len(book.tokens), len(book.sentences)])
    return {"books": len(load.books), "skipped": len(load.skipped)}


def run_dedup(config: PipelineConfig) -> dict:
    load = _load(config)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    sets = cluster_and_filter(
        load.books,
        threshold=config.overlap_threshold,
        metric=config.overlap_metric,
        patterns=config.anthology_patterns,
    )
    rows = [
        {
            "set_id": ds.set_id,
            "members": ds.sorted_members(),
            "anthologies": sorted(ds.anthology_book_ids),
        }
        for ds in sorted(sets, key=lambda ds: ds.set_id)
    ]
    _write_jsonl(artifact_path(config, "duplicates"), rows)
    n_dup = sum(1 for r in rows if len(r["members"]) > 1)
    return {"sets": len(rows), "duplicate_sets": n_dup}


def load_duplicate_sets(config: PipelineConfig) -> list[DuplicateSet]:
    rows = _read_jsonl(require(config, "duplicates"))
    return [
        DuplicateSet(
            set_id=row["set_id"],
            member_book_ids=frozenset(row["members"]),
            anthology_book_ids=frozenset(row["anthologies"]),
        )
        for row in rows
    ]


def _align_one(args) -> tuple[str, str, bool, list[dict]]:
    book_a, book_b, cfg = args
    try:
        alignment = align_pair(book_a, book_b, cfg)
    except AlignmentImpossible:
        return (book_a.book_id, book_b.book_id, False, [])
    records = extract_differences(alignment, book_a, book_b, cfg)
    return (book_a.book_id, book_b.book_id, True, [record_to_row(r) for r in records])


def run_align(config: PipelineConfig) -> dict:
    load = _load(config)
    books = books_by_id(load.books)
    sets = load_duplicate_sets(config)
    cfg = AlignConfig(config.max_segment_tokens, config.context_tokens)

    jobs = []
    for ds in sets:
        members = ds.sorted_members()
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                if a in books and b in books:
                    jobs.append((books[a], books[b], cfg))

    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_align_one, jobs, chunksize=4))
    else:
        results = [_align_one(job) for job in jobs]

    rows: list[dict] = []
    failed: list[list[str]] = []
    for a_id, b_id, ok, recs in results:
        if not ok:
            failed.append([a_id, b_id])
        rows.extend(recs)
    rows.sort(key=_record_sort_key)
    _write_jsonl(artifact_path(config, "differences"), rows)
    _write_jsonl(
        artifact_path(config, "differences").with_name("unalignable.jsonl"),
        [{"pair": pair} for pair in sorted(failed)],
    )
    return {"pairs": len(jobs), "differences": len(rows), "unalignable": len(failed)}


def run_rate(config: PipelineConfig) -> dict:
    rows = _read_jsonl(require(config, "differences"))
    records = [row_to_record(r) for r in rows]
    load = _load(config)
    scorer = make_scorer(config, _training_books(config, load))
    try:
        if isinstance(scorer, ExternalScorerClient):
            texts = sorted({r.sentence_a for r in records} | {r.sentence_b for r in records})
            cache: dict[str, SentenceScore] = {}
            for k in range(0, len(texts), 64):
                chunk = texts[k : k + 64]
                for text, score in zip(chunk, scorer.score_texts(chunk)):
                    cache[text] = score
            scorer = _CachingScorer(scorer, cache)
        rated = [rate_pair(r, scorer, seed=config.seed) for r in records]
    finally:
        closer = getattr(scorer, "base", scorer)
        if isinstance(closer, ExternalScorerClient):
            closer.close()
    out_rows = sorted((rated_to_row(rp) for rp in rated), key=_record_sort_key)
    _write_jsonl(artifact_path(config, "rated"), out_rows)
    ties = sum(1 for rp in rated if rp.tie)
    return {"rated": len(rated), "ties": ties}


def load_rated(config: PipelineConfig) -> list[RatedPair]:
    return [row_to_rated(row) for row in _read_jsonl(require(config, "rated"))]


def run_canonical(config: PipelineConfig) -> dict:
    rated = load_rated(config)
    sets = load_duplicate_sets(config)

    by_pair: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for rp in rated:
        key = (rp.record.book_a_id, rp.record.book_b_id)
        by_pair.setdefault(key, []).append((rp.p, rp.q))

    def compare(a: str, b: str) -> BookComparison:
        if (a, b) in by_pair:
            return build_comparison(a, b, by_pair[(a, b)])
        if (b, a) in by_pair:
            return build_comparison(b, a, by_pair[(b, a)])
        return build_comparison(a, b, [])

    rows = []
    for ds in sorted(sets, key=lambda ds: ds.set_id):
        result = tournament(ds, compare)
        rows.append(
            {
                "set_id": result.set_id,
                "canonical": result.canonical_book_id,
                "bracket": [
                    [
                        {
                            "a": m.a,
                            "b": m.b,
                            "winner": m.winner,
                            "lp_a": m.lp_a,
                            "lp_b": m.lp_b,
                            "flag": m.flag,
                        }
                        for m in rnd
                    ]
                    for rnd in result.bracket
                ],
            }
        )
    _write_jsonl(artifact_path(config, "canonical"), rows)
    return {"sets": len(rows)}


def _truth_sentences(config: PipelineConfig) -> list[tuple[str, str]]:
    """Clean sentences from the truth directory, for extra clean examples."""
    if config.truth_dir is None or not config.truth_dir.exists():
        return []
    out: list[tuple[str, str]] = []
    for path in sorted(config.truth_dir.glob("*.txt")):
        book = Book.from_text_id(path.stem, path.read_text("utf-8"))
        for si in range(len(book.sentences)):
            out.append((f"truth:{path.stem}", book.sentence_text(si)))
    return out


def run_export_training(config: PipelineConfig) -> dict:
    rated = load_rated(config)
    train, test = export_training(
        rated,
        seed=config.seed,
        clean_ratio=config.clean_ratio,
        test_fraction=config.test_fraction,
        extra_clean=_truth_sentences(config),
    )

    def rows(examples: list[TrainingExample]) -> list[dict]:
        return [
            {"text": e.text, "target": e.target, "label": e.label, "book_id": e.book_id}
            for e in examples
        ]

    _write_jsonl(artifact_path(config, "train"), rows(train))
    _write_jsonl(artifact_path(config, "test"), rows(test))
    table = mine_substitutions(rated)
    table.save_tsv(artifact_path(config, "substitutions"))
    return {"train": len(train), "test": len(test), "patterns": len(table.rows())}


def _load_examples(path: Path) -> list[TrainingExample]:
    return [
        TrainingExample(row["text"], row["target"], row["label"], row["book_id"])
        for row in _read_jsonl(path)
    ]


def _singleton_books(config: PipelineConfig, load: CorpusLoad) -> list[Book]:
    books = books_by_id(load.books)
    singles: list[Book] = []
    for ds in load_duplicate_sets(config):
        if len(ds.member_book_ids) == 1:
            (book_id,) = ds.member_book_ids
            if book_id in books:
                singles.append(books[book_id])
    return sorted(singles, key=lambda b: b.book_id)


def _build_detector(config: PipelineConfig, load: CorpusLoad) -> ChannelDetector:
    examples = _load_examples(require(config, "train"))
    lexicon = load_lexicon(config.lexicon)
    lm = _ngram_model(config, _training_books(config, load))
    table = SubstitutionTable.load_tsv(require(config, "substitutions"))
    return build_channel(
        examples, lexicon, lm, table,
        working_threshold=config.working_threshold,
        max_patterns=config.max_patterns,
    )


def run_detect(config: PipelineConfig) -> dict:
    load = _load(config)
    detector = _build_detector(config, load)
    rows = []
    for book in _singleton_books(config, load):
        for si, (lo, hi) in enumerate(book.sentences):
            for span in detect(book.tokens[lo:hi], detector):
                rows.append(
                    {
                        "book_id": book.book_id,
                        "sentence_index": si,
                        "token_start": lo + span.start,
                        "token_end": lo + span.end,
                        "confidence": round(span.confidence, 6),
                        "text": " ".join(
                            t.text for t in book.tokens[lo + span.start : lo + span.end]
                        ),
                    }
                )
    rows.sort(key=lambda r: (r["book_id"], r["token_start"]))
    _write_jsonl(artifact_path(config, "detections"), rows)
    return {"detections": len(rows)}


def run_correct(config: PipelineConfig) -> dict:
    load = _load(config)
    detector = _build_detector(config, load)
    table = SubstitutionTable.load_tsv(require(config, "substitutions"))
    corrector = ChannelCorrector(
        lexicon=detector.lexicon,
        lm=detector.lm,
        table=table,
        config=CorrectorConfig(
            max_edit_distance=config.max_edit_distance,
            top_k=config.top_k,
            beam_width=config.beam_width,
            max_patterns=config.max_patterns,
        ),
    )
    corrected_dir = artifact_path(config, "corrected_dir")
    corrected_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    applied = 0
    for book in _singleton_books(config, load):
        text, proposals = correct_book(
            book,
            detector,
            corrector,
            detection_threshold=config.detection_threshold,
            correction_threshold=config.correction_threshold,
            working_threshold=config.working_threshold,
        )
        (corrected_dir / f"{book.book_id}.txt").write_text(text, "utf-8")
        for p in proposals:
            applied += p.accepted and p.candidate.replacement != p.original
            rows.append(
                {
                    "book_id": book.book_id,
                    "sentence_index": p.sentence_index,
                    "token_start": p.token_start,
                    "token_end": p.token_end,
                    "detection_confidence": round(p.detection_confidence, 6),
                    "original": p.original,
                    "replacement": p.candidate.replacement,
                    "correction_score": round(p.candidate.score, 6),
                    "accepted": p.accepted,
                }
            )
    rows.sort(key=lambda r: (r["book_id"], r["token_start"]))
    _write_jsonl(artifact_path(config, "proposals"), rows)
    return {"proposals": len(rows), "applied": applied}


def run_eval_corrections(config: PipelineConfig) -> dict:
    if config.truth_dir is None:
        raise PipelineError("eval-corrections needs [paths] truth_dir in the config")
    load = _load(config)
    books = books_by_id(load.books)
    corrected_dir = require(config, "corrected_dir")
    cfg = AlignConfig(config.max_segment_tokens, config.context_tokens)
    out_rows = []
    totals = [0, 0, 0]
    for truth_path in sorted(config.truth_dir.glob("*.txt")):
        book_id = truth_path.stem
        corrected_path = corrected_dir / f"{book_id}.txt"
        if book_id not in books or not corrected_path.exists():
            continue
        truth = Book.from_text_id(f"{book_id}#truth", truth_path.read_text("utf-8"))
        corrected = Book.from_text_id(f"{book_id}#fixed", corrected_path.read_text("utf-8"))
        report = evaluate_corrections(truth, books[book_id], corrected, cfg)
        out_rows.append(
            [
                book_id,
                report.errors_corrected,
                report.errors_introduced,
                report.errors_missed,
            ]
        )
        totals[0] += report.errors_corrected
        totals[1] += report.errors_introduced
        totals[2] += report.errors_missed
    path = artifact_path(config, "corrections_report")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["book_id", "errors_corrected", "errors_introduced", "errors_missed"])
        writer.writerows(out_rows)
        writer.writerow(["TOTAL", *totals])
    return {
        "books": len(out_rows),
        "corrected": totals[0],
        "introduced": totals[1],
        "missed": totals[2],
    }


def run_analyze(config: PipelineConfig) -> dict:
    load = _load(config)
    books = books_by_id(load.books)
    rated = load_rated(config)

    lost: dict[str, set[int]] = {}
    for rp in rated:
        if rp.tie:
            continue
        loser = rp.loser_book_id
        sent_range = rp.record.sent_range_a if loser == rp.record.book_a_id else rp.record.sent_range_b
        lost.setdefault(loser, set()).update(range(sent_range[0], sent_range[1]))

    reports: list[QualityReport] = []
    for ds in load_duplicate_sets(config):
        members = [m for m in ds.sorted_members() if m in books]
        if len(members) > 1:
            for book_id in members:
                reports.append(quality_from_pairs(books[book_id], lost.get(book_id, set())))

    det_path = artifact_path(config, "detections")
    if det_path.exists():
        flagged: dict[str, set[int]] = {}
        for row in _read_jsonl(det_path):
            if row["confidence"] >= config.detection_threshold:
                flagged.setdefault(row["book_id"], set()).add(row["sentence_index"])
        for book in _singleton_books(config, load):
            reports.append(
                quality_from_detections(book, flagged.get(book.book_id, set()))
            )

    metas = {b.book_id: b.meta for b in load.books}
    lib_rows, year_rows = aggregate_quality(reports, metas)
    write_quality_csv(artifact_path(config, "quality_library"), lib_rows)
    write_year_csv(artifact_path(config, "quality_year"), year_rows)
    return {"books": len(reports), "libraries": len(lib_rows), "years": len(year_rows)}


def _read_golden_pairs(path: Path) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["better_id", "worse_id"]:
            raise PipelineError(f"{path}: expected header better_id,worse_id")
        return [(row[0].strip(), row[1].strip()) for row in reader if row]


def run_golden_eval(config: PipelineConfig) -> dict:
    if config.golden_pairs is None:
        raise PipelineError("golden-eval needs [paths] golden_pairs in the config")
    if not config.golden_pairs.exists():
        raise PipelineError(f"golden pairs file not found: {config.golden_pairs}")
    pairs = _read_golden_pairs(config.golden_pairs)
    load = _load(config)
    books = books_by_id(load.books)
    missing = sorted({b for pair in pairs for b in pair} - books.keys())
    if missing:
        raise PipelineError(f"golden pairs name unknown books: {', '.join(missing)}")
    scorer = make_scorer(config, _training_books(config, load))
    cfg = AlignConfig(config.max_segment_tokens, config.context_tokens)
    try:
        from .canonical import compare_books

        def compare(a: str, b: str) -> BookComparison:
            return compare_books(books[a], books[b], scorer, cfg, seed=config.seed)[0]

        accuracy = golden_eval(pairs, compare)
    finally:
        if isinstance(scorer, ExternalScorerClient):
            scorer.close()
    config.out_dir.mkdir(parents=True, exist_ok=True)
    artifact_path(config, "golden").write_text(
        f"pairs: {len(pairs)}\naccuracy: {accuracy:.6f}\n", "utf-8"
    )
    return {"pairs": len(pairs), "accuracy": accuracy}
