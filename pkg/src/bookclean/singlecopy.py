"""Repairing books that have no duplicate: detect, correct, evaluate.

Rated differences from duplicate pairs double as supervision.  The losing
side of each gap, wrapped in literal ``<ocr>``/``</ocr>`` markers, becomes
an error example whose target is the winning gap text; winning sentences
supply clean examples.  A logistic model over lexicon, surprisal, and
substitution-pattern features flags suspect tokens, and a noisy-channel
search over the mined substitution table proposes repairs ranked by
channel weight times language-model fit.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .align import AlignConfig, align_pair
from .analysis import SubstitutionTable
from .corpus import Book, Token, tokenize
from .lm import NgramLM
from .scoring import RatedPair

__all__ = [
    "ChannelCorrector",
    "ChannelDetector",
    "CorrectionCandidate",
    "CorrectionReport",
    "CorrectorConfig",
    "DetectionSpan",
    "MarkupError",
    "Proposal",
    "TrainingExample",
    "apply_threshold",
    "build_channel",
    "correct",
    "correct_book",
    "detect",
    "evaluate_corrections",
    "export_training",
    "make_error_example",
    "parse_marked",
]

OPEN_TAG = "<ocr>"
CLOSE_TAG = "</ocr>"


class MarkupError(Exception):
    """Malformed error markers in a training or correction input."""


@dataclass(frozen=True)
class TrainingExample:
    text: str
    target: str
    label: str  # "clean" | "error"
    book_id: str


def make_error_example(rated: RatedPair) -> TrainingExample | None:
    """Wrap the losing gap span in markers; None when the pair was a tie."""
    if rated.tie:
        return None
    rec = rated.record
    if rated.winner == "a":
        loser_sentence, winner_sentence = rec.sentence_b, rec.sentence_a
        (ls, le), (ws, we) = rec.span_b, rec.span_a
    else:
        loser_sentence, winner_sentence = rec.sentence_a, rec.sentence_b
        (ls, le), (ws, we) = rec.span_a, rec.span_b
    loser_tokens = loser_sentence.split(" ") if loser_sentence else []
    winner_tokens = winner_sentence.split(" ") if winner_sentence else []
    marked = " ".join(
        loser_tokens[:ls] + [OPEN_TAG] + loser_tokens[ls:le] + [CLOSE_TAG] + loser_tokens[le:]
    )
    return TrainingExample(
        text=marked,
        target=" ".join(winner_tokens[ws:we]),
        label="error",
        book_id=rated.loser_book_id,
    )


def _unit_fraction(seed: int, key: str) -> float:
    digest = hashlib.blake2b(f"{seed}:{key}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2**64


def _book_groups(rated_pairs: Sequence[RatedPair], extra_books: Iterable[str]) -> dict[str, str]:
    """Map each book id to its duplicate-component key (min id in component)."""
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for rp in rated_pairs:
        ra, rb = find(rp.record.book_a_id), find(rp.record.book_b_id)
        if ra != rb:
            lo, hi = sorted((ra, rb))
            parent[hi] = lo
    for b in extra_books:
        find(b)
    by_root: dict[str, list[str]] = {}
    for b in parent:
        by_root.setdefault(find(b), []).append(b)
    out = {}
    for members in by_root.values():
        key = min(members)
        for m in members:
            out[m] = key
    return out


def export_training(
    rated_pairs: Sequence[RatedPair],
    seed: int = 0,
    clean_ratio: float = 0.5,
    test_fraction: float = 0.2,
    extra_clean: Sequence[tuple[str, str]] = (),
) -> tuple[list[TrainingExample], list[TrainingExample]]:
    """Build (train, test) example lists from rated differences.

    Clean examples (winning sentences plus any ``extra_clean`` sentences)
    are sampled to make up ``clean_ratio`` of the output.  The split is by
    duplicate component, so no book's text lands in both halves.
    """
    if not 0.0 <= clean_ratio < 1.0:
        raise ValueError("clean_ratio must be in [0, 1)")
    errors: list[TrainingExample] = []
    clean_pool: list[TrainingExample] = []
    for rp in rated_pairs:
        ex = make_error_example(rp)
        if ex is None:
            continue
        errors.append(ex)
        winner_sentence = (
            rp.record.sentence_a if rp.winner == "a" else rp.record.sentence_b
        )
        clean_pool.append(TrainingExample(winner_sentence, "", "clean", rp.winner_book_id))
    for book_id, sentence in extra_clean:
        clean_pool.append(TrainingExample(sentence, "", "clean", book_id))

    want_clean = round(len(errors) * clean_ratio / (1.0 - clean_ratio))
    clean_pool.sort(key=lambda e: (e.book_id, e.text))
    if len(clean_pool) > want_clean:
        rng = random.Random(seed)
        rng.shuffle(clean_pool)
        clean_pool = clean_pool[:want_clean]

    groups = _book_groups(rated_pairs, [e.book_id for e in clean_pool])
    train: list[TrainingExample] = []
    test: list[TrainingExample] = []
    for ex in errors + clean_pool:
        key = groups.get(ex.book_id, ex.book_id)
        dest = test if _unit_fraction(seed, f"split:{key}") < test_fraction else train
        dest.append(ex)
    order = lambda e: (e.book_id, e.label, e.text, e.target)
    return sorted(train, key=order), sorted(test, key=order)


def parse_marked(text: str) -> tuple[str, tuple[int, int] | None]:
    """Strip markers; returns (clean text, char span of the marked region)."""
    i = text.find(OPEN_TAG)
    j = text.find(CLOSE_TAG)
    if i == -1 and j == -1:
        return text, None
    if i == -1 or j == -1 or j < i or text.count(OPEN_TAG) > 1 or text.count(CLOSE_TAG) > 1:
        raise MarkupError(f"malformed error markers in {text!r}")
    clean = text[:i] + text[i + len(OPEN_TAG) : j] + text[j + len(CLOSE_TAG) :]
    return clean, (i, j - len(OPEN_TAG))


@dataclass(frozen=True)
class DetectionSpan:
    start: int  # token indices, half-open, within the scored sentence
    end: int
    confidence: float


@dataclass
class ChannelDetector:
    lexicon: frozenset[str]
    lm: NgramLM
    patterns: tuple[tuple[str, str], ...]
    coef: np.ndarray
    intercept: float
    working_threshold: float = 0.5


def _pattern_hit(token: str, patterns: Sequence[tuple[str, str]], lexicon: frozenset[str]) -> bool:
    folded = token.casefold()
    for src, rep in patterns:
        start = 0
        while True:
            k = folded.find(src, start)
            if k == -1:
                break
            cand = folded[:k] + rep + folded[k + len(src) :]
            if _plausible_text(cand, lexicon):
                return True
            start = k + 1
    return False


def _plausible_text(text: str, lexicon: frozenset[str]) -> bool:
    if text == "":
        return True
    for part in text.split(" "):
        if part.casefold() in lexicon:
            continue
        if len(part) == 1 and not part.isalpha():
            continue
        if part.isdigit():
            continue
        return False
    return True


def token_features(
    tokens: Sequence[Token],
    lexicon: frozenset[str],
    lm: NgramLM,
    patterns: Sequence[tuple[str, str]],
) -> np.ndarray:
    """Per-token feature matrix: lexicon miss, surprisal z-score, pattern hit."""
    n = len(tokens)
    feats = np.zeros((n, 3))
    if n == 0:
        return feats
    texts = [t.text for t in tokens]
    surprisal = -np.array(lm.token_logprobs(texts))
    mean = surprisal.mean()
    std = surprisal.std()
    z = (surprisal - mean) / (std + 1e-9)
    for i, tok in enumerate(tokens):
        miss = tok.is_word and tok.text.casefold() not in lexicon
        feats[i, 0] = 1.0 if miss else 0.0
        feats[i, 1] = z[i]
        feats[i, 2] = 1.0 if miss and _pattern_hit(tok.text, patterns, lexicon) else 0.0
    return feats


# Used when training data is degenerate (single class): lexicon misses
# dominate, pattern hits push higher, surprisal nudges.
_FALLBACK_COEF = np.array([6.0, 0.5, 2.0])
_FALLBACK_INTERCEPT = -4.0


def build_channel(
    examples: Sequence[TrainingExample],
    lexicon: frozenset[str],
    lm: NgramLM,
    table: SubstitutionTable,
    working_threshold: float = 0.5,
    max_patterns: int = 50,
) -> ChannelDetector:
    """Fit the detection model on exported training examples."""
    patterns = tuple(table.patterns(max_patterns=max_patterns))
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    for ex in examples:
        clean, span = parse_marked(ex.text)
        toks = tokenize(clean)
        feats = token_features(toks, lexicon, lm, patterns)
        labels = np.zeros(len(toks))
        if ex.label == "error" and span is not None:
            lo, hi = span
            for i, t in enumerate(toks):
                if t.char_start < hi and t.char_end > lo:
                    labels[i] = 1.0
        xs.append(feats)
        ys.append(labels)
    if not xs:
        return ChannelDetector(
            lexicon, lm, patterns, _FALLBACK_COEF.copy(), _FALLBACK_INTERCEPT, working_threshold
        )
    x = np.vstack(xs)
    y = np.concatenate(ys)
    if len(np.unique(y)) < 2:
        coef, intercept = _FALLBACK_COEF.copy(), _FALLBACK_INTERCEPT
    else:
        from sklearn.linear_model import LogisticRegression

        # error tokens are a small minority of training tokens; unweighted
        # fits sit below 0.5 for every token and detect nothing
        clf = LogisticRegression(max_iter=1000, class_weight="balanced")
        clf.fit(x, y)
        coef, intercept = clf.coef_[0].copy(), float(clf.intercept_[0])
    return ChannelDetector(lexicon, lm, patterns, coef, intercept, working_threshold)


def token_confidences(tokens: Sequence[Token], detector: ChannelDetector) -> np.ndarray:
    feats = token_features(tokens, detector.lexicon, detector.lm, detector.patterns)
    logits = feats @ detector.coef + detector.intercept
    return 1.0 / (1.0 + np.exp(-logits))


def detect(
    tokens: Sequence[Token],
    detector: ChannelDetector,
    threshold: float | None = None,
) -> list[DetectionSpan]:
    """Maximal runs of tokens whose error confidence clears the threshold.

    A span's confidence is its strongest token's confidence.
    """
    if not tokens:
        return []
    thr = detector.working_threshold if threshold is None else threshold
    conf = token_confidences(tokens, detector)
    spans: list[DetectionSpan] = []
    i = 0
    n = len(tokens)
    while i < n:
        if conf[i] < thr:
            i += 1
            continue
        j = i
        while j < n and conf[j] >= thr:
            j += 1
        spans.append(DetectionSpan(i, j, float(conf[i:j].max())))
        i = j
    return spans


@dataclass(frozen=True)
class CorrectorConfig:
    max_edit_distance: int = 3
    top_k: int = 50
    beam_width: int = 200
    generic_edit_weight: float = 0.01
    structural_weight: float = 0.02
    min_pattern_share: float = 1e-3
    max_patterns: int = 100


@dataclass
class ChannelCorrector:
    lexicon: frozenset[str]
    lm: NgramLM
    table: SubstitutionTable
    config: CorrectorConfig = field(default_factory=CorrectorConfig)


@dataclass(frozen=True)
class CorrectionCandidate:
    replacement: str
    score: float


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _pattern_edits(s: str, patterns: Sequence[tuple[str, str, float]]) -> list[tuple[str, float]]:
    out = []
    for src, rep, lw in patterns:
        start = 0
        while True:
            k = s.find(src, start)
            if k == -1:
                break
            out.append((s[:k] + rep + s[k + len(src) :], lw))
            start = k + 1
    return out


def _generic_edits(s: str, lw: float) -> list[tuple[str, float]]:
    out = []
    for i in range(len(s)):
        if s[i] == " ":
            continue
        out.append((s[:i] + s[i + 1 :], lw))  # deletion
        for c in _LETTERS:
            if c != s[i]:
                out.append((s[:i] + c + s[i + 1 :], lw))  # substitution
    for i in range(len(s) + 1):
        for c in _LETTERS:
            out.append((s[:i] + c + s[i:], lw))  # insertion
    return out


def _generate_candidates(span: str, corrector: ChannelCorrector) -> dict[str, float]:
    """Candidate replacement strings with channel log weights (identity = 0)."""
    cfg = corrector.config
    patterns = [
        (src, rep, math.log(max(corrector.table.row_share(src, rep), cfg.min_pattern_share)))
        for src, rep in corrector.table.patterns(max_patterns=cfg.max_patterns)
    ]
    struct_lw = math.log(cfg.structural_weight)
    generic_lw = math.log(cfg.generic_edit_weight)

    best: dict[str, float] = {span: 0.0}
    seeds: dict[str, float] = {span: 0.0}
    if " " in span:
        seeds[span.replace(" ", "")] = struct_lw  # merge split tokens
    if " " not in span and len(span) >= 4 and span.isalpha():
        for i in range(2, len(span) - 1):
            seeds[span[:i] + " " + span[i:]] = struct_lw  # split merged tokens
    for s, lw in seeds.items():
        if lw > best.get(s, -math.inf):
            best[s] = lw

    frontier = dict(seeds)
    for depth in range(cfg.max_edit_distance):
        nxt: dict[str, float] = {}
        pool = sorted(frontier.items(), key=lambda kv: (-kv[1], kv[0]))[: cfg.beam_width]
        for s, lw in pool:
            edits = _pattern_edits(s, patterns)
            if depth == 0:
                edits.extend(_generic_edits(s, generic_lw))
            for cand, elw in edits:
                w = lw + elw
                if w > nxt.get(cand, -math.inf):
                    nxt[cand] = w
        for cand, w in nxt.items():
            if w > best.get(cand, -math.inf):
                best[cand] = w
        frontier = nxt
        if not frontier:
            break

    valid = {
        c: w
        for c, w in best.items()
        if c == span or _plausible_text(" ".join(c.split()), corrector.lexicon)
    }
    # normalize whitespace once here so duplicates collapse
    normed: dict[str, float] = {}
    for c, w in valid.items():
        key = " ".join(c.split()) if c.strip() else ""
        if w > normed.get(key, -math.inf):
            normed[key] = w
    kept = sorted(normed.items(), key=lambda kv: (-kv[1], kv[0]))[: cfg.top_k]
    out = dict(kept)
    span_key = " ".join(span.split()) if span.strip() else ""
    out.setdefault(span_key, 0.0)  # identity must survive the cap
    return out


def correct(marked_text: str, corrector: ChannelCorrector) -> CorrectionCandidate:
    """Best replacement for the marked span, with a posterior-style score.

    Candidates are ranked by channel weight plus language-model log
    probability of the repaired sentence.  The score is the minimum, over
    the winning replacement's tokens, of the total posterior mass of
    candidates agreeing on that token; the identity replacement always
    competes, so low-evidence spans fall back to no change.
    """
    clean, span = parse_marked(marked_text)
    if span is None:
        raise MarkupError("no <ocr> span to correct")
    toks = tokenize(clean)
    lo, hi = span
    span_idx = [i for i, t in enumerate(toks) if t.char_start < hi and t.char_end > lo]
    texts = [t.text for t in toks]
    if span_idx:
        s, e = span_idx[0], span_idx[-1] + 1
    else:
        # empty span: insertion point at the first token past the markers
        s = e = next((i for i, t in enumerate(toks) if t.char_start >= lo), len(toks))
    span_str = " ".join(texts[s:e])

    cands = _generate_candidates(span_str, corrector)
    totals: dict[str, float] = {}
    for cand, channel_lw in cands.items():
        repaired = texts[:s] + (cand.split(" ") if cand else []) + texts[e:]
        totals[cand] = channel_lw + corrector.lm.sentence_logprob_total(repaired)

    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    winner = ranked[0][0]
    peak = ranked[0][1]
    weights = {c: math.exp(t - peak) for c, t in totals.items()}
    z = sum(weights.values())
    posterior = {c: w / z for c, w in weights.items()}

    win_parts = winner.split(" ") if winner else []
    if not win_parts:
        score = posterior[winner]
    else:
        score = 1.0
        for idx, part in enumerate(win_parts):
            mass = sum(
                pb
                for c, pb in posterior.items()
                if (c.split(" ") if c else []) [idx : idx + 1] == [part]
            )
            score = min(score, mass)
    return CorrectionCandidate(winner, score)


@dataclass(frozen=True)
class Proposal:
    sentence_index: int
    token_start: int  # absolute book token indices
    token_end: int
    detection_confidence: float
    original: str
    candidate: CorrectionCandidate
    accepted: bool


def apply_threshold(
    proposals: Sequence[Proposal],
    correction_threshold: float = 0.95,
    detection_threshold: float = 0.95,
) -> list[Proposal]:
    """Keep proposals clearing both the correction and detection bars."""
    return [
        p
        for p in proposals
        if p.candidate.score >= correction_threshold
        and p.detection_confidence >= detection_threshold
    ]


def correct_book(
    book: Book,
    detector: ChannelDetector,
    corrector: ChannelCorrector,
    detection_threshold: float = 0.95,
    correction_threshold: float = 0.95,
    working_threshold: float | None = None,
) -> tuple[str, list[Proposal]]:
    """Detect and repair every sentence; returns (corrected text, proposals)."""
    proposals: list[Proposal] = []
    for si, (lo, hi) in enumerate(book.sentences):
        toks = book.tokens[lo:hi]
        spans = detect(toks, detector, working_threshold)
        if not spans:
            continue
        texts = [t.text for t in toks]
        for span in spans:
            marked = " ".join(
                texts[: span.start] + [OPEN_TAG] + texts[span.start : span.end]
                + [CLOSE_TAG] + texts[span.end :]
            )
            cand = correct(marked, corrector)
            proposals.append(
                Proposal(
                    sentence_index=si,
                    token_start=lo + span.start,
                    token_end=lo + span.end,
                    detection_confidence=span.confidence,
                    original=" ".join(texts[span.start : span.end]),
                    candidate=cand,
                    accepted=False,
                )
            )
    keep = {
        (p.token_start, p.token_end)
        for p in apply_threshold(proposals, correction_threshold, detection_threshold)
    }
    proposals = [
        Proposal(
            p.sentence_index, p.token_start, p.token_end, p.detection_confidence,
            p.original, p.candidate, (p.token_start, p.token_end) in keep,
        )
        for p in proposals
    ]
    text = book.raw_text
    for p in sorted(proposals, key=lambda p: -p.token_start):
        if not p.accepted or p.candidate.replacement == p.original:
            continue
        c0 = book.tokens[p.token_start].char_start
        c1 = book.tokens[p.token_end - 1].char_end
        text = text[:c0] + p.candidate.replacement + text[c1:]
    return text, proposals


@dataclass(frozen=True)
class CorrectionReport:
    errors_corrected: int
    errors_introduced: int
    errors_missed: int


def evaluate_corrections(
    truth: Book,
    dirty: Book,
    corrected: Book,
    config: AlignConfig | None = None,
) -> CorrectionReport:
    """Count repairs against a known-good text via two alignments.

    A truth token is "right" in a version when the alignment matches it.
    Corrected = wrong in dirty, right after repair; introduced = the
    reverse; missed = wrong in both.
    """
    d_matches = align_pair(truth, dirty, config).matches
    c_matches = align_pair(truth, corrected, config).matches
    n = len(truth.tokens)
    in_dirty = {i for i, _ in d_matches}
    in_corrected = {i for i, _ in c_matches}
    fixed = len(in_corrected - in_dirty)
    broken = len(in_dirty - in_corrected)
    missed = sum(1 for i in range(n) if i not in in_dirty and i not in in_corrected)
    return CorrectionReport(fixed, broken, missed)
