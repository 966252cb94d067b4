"""Sentence scorers and pairwise rating of difference records.

Every scorer returns a ``SentenceScore`` whose ``normalized_ll`` is a mean
log likelihood per token (natural log), so scores are comparable across
sentence lengths and scorer kinds.  ``rate_pair`` turns two scores into a
confidence via a two-way softmax; exact ties are broken by a seeded RNG
keyed on the record, so the outcome is reproducible and independent of
processing order.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

from .align import DifferenceRecord
from .corpus import Token, tokenize
from .lm import NgramLM

__all__ = [
    "DictionaryScorer",
    "NgramScorer",
    "RatedPair",
    "SentenceScore",
    "Scorer",
    "load_lexicon",
    "rate_pair",
    "softmax_pair",
]

# Confidences are clamped away from exact 0/1 so log posteriors stay finite.
P_FLOOR = 1e-15

# ln probability assigned when no sentence word is in the lexicon.
DICT_FLOOR_LL = -20.0


@dataclass(frozen=True)
class SentenceScore:
    normalized_ll: float
    token_count: int
    scorer_id: str


class Scorer(Protocol):
    scorer_id: str

    def score(self, tokens: Sequence[Token]) -> SentenceScore: ...


def load_lexicon(path: str | Path | None = None) -> frozenset[str]:
    """Word list as a case-folded set; ``None`` loads the bundled list."""
    if path is None:
        text = resources.files("bookclean").joinpath("data/wordlist.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(w.strip().casefold() for w in text.splitlines() if w.strip())


class DictionaryScorer:
    """Mean ll = ln(fraction of word tokens found in the lexicon).

    Punctuation and number tokens are ignored.  A sentence with no word
    tokens scores ratio 1 (nothing to judge); a zero ratio is floored so the
    log stays finite.
    """

    scorer_id = "dict"

    def __init__(self, lexicon: frozenset[str], floor_ll: float = DICT_FLOOR_LL) -> None:
        self.lexicon = lexicon
        self.floor_ll = floor_ll

    def score(self, tokens: Sequence[Token]) -> SentenceScore:
        words = [t.text.casefold() for t in tokens if t.is_word]
        if not words:
            return SentenceScore(0.0, len(tokens), self.scorer_id)
        ratio = sum(w in self.lexicon for w in words) / len(words)
        ll = math.log(ratio) if ratio > 0 else self.floor_ll
        return SentenceScore(ll, len(tokens), self.scorer_id)


class NgramScorer:
    scorer_id = "ngram"

    def __init__(self, model: NgramLM) -> None:
        self.model = model

    def score(self, tokens: Sequence[Token]) -> SentenceScore:
        texts = [t.text for t in tokens]
        return SentenceScore(self.model.sentence_logprob(texts), len(texts), self.scorer_id)


def softmax_pair(ll_a: float, ll_b: float) -> float:
    """P(side a) = exp(ll_a) / (exp(ll_a) + exp(ll_b)), computed stably."""
    d = ll_b - ll_a
    if d >= 0:
        e = math.exp(-d)
        p = e / (1.0 + e)
    else:
        p = 1.0 / (1.0 + math.exp(d))
    return min(max(p, P_FLOOR), 1.0 - P_FLOOR)


def _record_key(record: DifferenceRecord) -> str:
    span_a = record.span_a
    span_b = record.span_b
    return (
        f"{record.book_a_id}|{record.book_b_id}|{record.sent_range_a[0]}"
        f"|{record.sent_range_b[0]}|{span_a[0]}|{span_a[1]}|{span_b[0]}|{span_b[1]}"
    )


def tie_break(seed: int, key: str) -> str:
    """Deterministic coin flip for one record; independent of record order."""
    digest = hashlib.blake2b(f"{seed}:{key}".encode("utf-8"), digest_size=8).digest()
    rng = random.Random(int.from_bytes(digest, "big"))
    return "a" if rng.random() < 0.5 else "b"


@dataclass(frozen=True)
class RatedPair:
    record: DifferenceRecord
    score_a: SentenceScore
    score_b: SentenceScore
    p: float  # confidence that side a is the correct reading
    q: float
    winner: str  # "a" | "b"
    tie: bool

    @property
    def winner_book_id(self) -> str:
        return self.record.book_a_id if self.winner == "a" else self.record.book_b_id

    @property
    def loser_book_id(self) -> str:
        return self.record.book_b_id if self.winner == "a" else self.record.book_a_id


def rate_pair(record: DifferenceRecord, scorer: Scorer, seed: int = 0) -> RatedPair:
    """Score both sentence renderings of a difference and pick a winner."""
    score_a = scorer.score(tokenize(record.sentence_a))
    score_b = scorer.score(tokenize(record.sentence_b))
    p = softmax_pair(score_a.normalized_ll, score_b.normalized_ll)
    tie = score_a.normalized_ll == score_b.normalized_ll
    if tie:
        winner = tie_break(seed, _record_key(record))
    else:
        winner = "a" if score_a.normalized_ll > score_b.normalized_ll else "b"
    return RatedPair(record, score_a, score_b, p, 1.0 - p, winner, tie)
