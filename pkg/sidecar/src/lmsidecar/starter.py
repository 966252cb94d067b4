"""Self-contained statistical language model used when no neural model is available.

A causal word-bigram model with Jelinek-Mercer interpolation down to
unigrams, opened to unseen words through a character trigram model, all
trained at startup from a plain-text corpus (the bundled starter corpus
by default).  Everything is counting and arithmetic over insertion-ordered
structures, so identical training text yields bit-identical scores in any
process.

Scoring follows the causal convention used by the neural backend: the
first token of a text receives no conditional probability and is excluded
from the mean, so ``num_tokens`` reports the number of scored transitions
(``len(words) - 1``).  A single-word text falls back to its unigram
probability.
"""
from __future__ import annotations

import math
import re
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .config import STARTER_MODEL, SidecarConfig

__all__ = ["CharTrigram", "CorrectRequestError", "StarterBackend", "StarterModel", "word_tokens"]

# Words keep internal apostrophes ("isn't" stays whole); digit runs are
# tokens; punctuation carries no signal for a word model and is dropped.
_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*|\d+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+")
_OCR_OPEN, _OCR_CLOSE = "<ocr>", "</ocr>"
_OCR_SPAN_RE = re.compile(r"<ocr>(.*?)</ocr>", re.DOTALL)

# Characters that cannot occur in a token, reserved for model framing.
_CHAR_START = "\x02"
_CHAR_END = "\x03"
_CHAR_UNK = "\x04"

_LAMBDA_BIGRAM = 0.7   # weight of the bigram MLE against the unigram backoff
_GAMMA_CHAR = 0.1      # weight of the character model inside the unigram mixture
_CHAR_ALPHA = 0.1      # add-alpha smoothing for character trigram counts
_EDIT_PENALTY = math.log(0.1)  # per-edit channel penalty for correction candidates
_MAX_EDITS = 2
_MIN_TRAIN_TOKENS = 50


class CorrectRequestError(ValueError):
    """A correct request without exactly one ``<ocr> ... </ocr>`` span."""


def word_tokens(text: str) -> list[str]:
    """Lowercased word/number tokens; curly apostrophes fold to ASCII."""
    return _WORD_RE.findall(text.replace("’", "'").lower())


def _logadd(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def _edit_distance(a: str, b: str, limit: int) -> int:
    """Levenshtein distance, reported as ``limit + 1`` once it exceeds ``limit``."""
    if abs(len(a) - len(b)) > limit:
        return limit + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        best = i
        for j, cb in enumerate(b, start=1):
            cost = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
            cur.append(cost)
            best = min(best, cost)
        if best > limit:
            return limit + 1
        prev = cur
    return prev[-1]


class CharTrigram:
    """Add-alpha character trigram over tokens, with boundary framing.

    Each token is scored as P(c_1 .. c_n, END | START START ...); characters
    never seen in training map to one reserved unknown symbol so every
    string has positive probability.
    """

    def __init__(self, tokens: list[str]) -> None:
        alphabet = {ch for tok in tokens for ch in tok}
        alphabet.update((_CHAR_END, _CHAR_UNK))
        self.alphabet = sorted(alphabet)
        self._alphabet_set = frozenset(alphabet)
        self._alpha_total = _CHAR_ALPHA * len(self.alphabet)
        self._counts: dict[str, Counter] = {}
        self._totals: Counter = Counter()
        for tok in tokens:
            ctx = _CHAR_START * 2
            for ch in tok + _CHAR_END:
                self._counts.setdefault(ctx, Counter())[ch] += 1
                self._totals[ctx] += 1
                ctx = ctx[1] + ch

    def log_prob(self, token: str) -> float:
        ctx = _CHAR_START * 2
        total = 0.0
        for ch in token + _CHAR_END:
            if ch not in self._alphabet_set:
                ch = _CHAR_UNK
            seen = self._counts.get(ctx)
            count = seen.get(ch, 0) if seen is not None else 0
            denom = self._totals.get(ctx, 0) + self._alpha_total
            total += math.log((count + _CHAR_ALPHA) / denom)
            ctx = ctx[1] + ch
        return total

    def per_char_nll(self, token: str) -> float:
        return -self.log_prob(token) / (len(token) + 1)


class StarterModel:
    """Bigram language model plus the character statistics around it."""

    def __init__(self, text: str) -> None:
        sentences = [word_tokens(part) for line in text.splitlines()
                     for part in _SENTENCE_SPLIT_RE.split(line)]
        sentences = [s for s in sentences if s]
        stream = [tok for sent in sentences for tok in sent]
        if len(stream) < _MIN_TRAIN_TOKENS:
            raise ValueError(
                f"training corpus too small: {len(stream)} tokens "
                f"(need at least {_MIN_TRAIN_TOKENS})"
            )
        self.unigrams: Counter = Counter(stream)
        self.total = len(stream)
        self.bigrams: dict[str, Counter] = {}
        self._prev_totals: Counter = Counter()
        for sent in sentences:
            for prev, word in zip(sent, sent[1:]):
                self.bigrams.setdefault(prev, Counter())[word] += 1
                self._prev_totals[prev] += 1
        self.chars = CharTrigram(stream)
        # Per-occurrence character-surprisal distribution of real text,
        # the yardstick detect() measures suspect tokens against.
        self._char_nlls = sorted(self.chars.per_char_nll(tok) for tok in stream)

    # -- probabilities ------------------------------------------------------

    def log_p_word(self, word: str) -> float:
        """Unigram mixture: corpus frequency interpolated with the char model."""
        char_part = math.log(_GAMMA_CHAR) + self.chars.log_prob(word)
        count = self.unigrams.get(word, 0)
        if count == 0:
            return char_part
        freq_part = math.log(1.0 - _GAMMA_CHAR) + math.log(count / self.total)
        return _logadd(freq_part, char_part)

    def log_p_next(self, prev: str, word: str) -> float:
        """Causal transition: bigram MLE interpolated with the unigram mixture."""
        backoff = math.log(1.0 - _LAMBDA_BIGRAM) + self.log_p_word(word)
        total = self._prev_totals.get(prev, 0)
        if total == 0:
            return self.log_p_word(word)
        count = self.bigrams[prev].get(word, 0)
        if count == 0:
            return backoff
        direct = math.log(_LAMBDA_BIGRAM) + math.log(count / total)
        return _logadd(direct, backoff)

    def score_words(self, tokens: list[str]) -> tuple[float, int]:
        """Mean negative log likelihood and the count of scored terms."""
        if not tokens:
            return 0.0, 0
        if len(tokens) == 1:
            return -self.log_p_word(tokens[0]), 1
        total = 0.0
        for prev, word in zip(tokens, tokens[1:]):
            total += self.log_p_next(prev, word)
        scored = len(tokens) - 1
        return -total / scored, scored

    # -- character-level plausibility ---------------------------------------

    def known(self, word: str) -> bool:
        return word in self.unigrams

    def char_percentile(self, word: str) -> float:
        """Fraction of training tokens with smaller character surprisal.

        1.0 means the word's spelling is stranger than everything the
        model has seen; a real word typically lands near the middle.
        """
        return bisect_left(self._char_nlls, self.chars.per_char_nll(word)) / len(self._char_nlls)


@dataclass(frozen=True)
class _Candidate:
    key: str
    edits: int


class StarterBackend:
    """Protocol backend over a :class:`StarterModel`.

    Detection flags whitespace tokens whose word parts are out of
    vocabulary, with confidence equal to the character-surprisal
    percentile against training text.  Correction re-ranks in-vocabulary
    words within edit distance two of the marked span under the bigram
    context, with a fixed per-edit channel penalty, and reports the
    winner's posterior among the candidates considered.
    """

    def __init__(self, model: StarterModel, *, scorer_id: str,
                 detect: bool = True, correct: bool = True) -> None:
        self.model = model
        self.scorer_id = scorer_id
        ops = ["score"]
        if detect:
            ops.append("detect")
        if correct:
            ops.append("correct")
        self.ops = tuple(ops)
        self._vocab = sorted(model.unigrams)

    @classmethod
    def from_config(cls, config: SidecarConfig) -> "StarterBackend":
        if config.train_path is not None:
            text = Path(config.train_path).read_text(encoding="utf-8")
            scorer_id = f"lmsidecar/starter-bigram-v1:{Path(config.train_path).stem}"
        else:
            text = (resources.files("lmsidecar") / "data" / "starter_corpus.txt").read_text(
                encoding="utf-8"
            )
            scorer_id = "lmsidecar/starter-bigram-v1"
        return cls(
            StarterModel(text),
            scorer_id=scorer_id,
            detect=config.detect_model == STARTER_MODEL,
            correct=config.correct_model == STARTER_MODEL,
        )

    # -- score --------------------------------------------------------------

    def score_batch(self, texts: list[str]) -> list[tuple[float, int]]:
        return [self.model.score_words(word_tokens(text)) for text in texts]

    # -- detect -------------------------------------------------------------

    def _token_conf(self, raw: str) -> float:
        parts = word_tokens(raw)
        conf = 0.0
        for part in parts:
            if part.isdigit() or self.model.known(part):
                continue
            conf = max(conf, self.model.char_percentile(part))
        return conf

    def detect(self, text: str) -> list[dict]:
        """Spans of suspicious whitespace tokens, half-open token indexes."""
        confs = [self._token_conf(raw) for raw in text.split()]
        spans: list[dict] = []
        start = None
        peak = 0.0
        for i, conf in enumerate(confs + [0.0]):
            if conf >= 0.5:
                if start is None:
                    start = i
                    peak = conf
                else:
                    peak = max(peak, conf)
            elif start is not None:
                spans.append({"start_token": start, "end_token": i, "conf": peak})
                start = None
        return spans

    # -- correct ------------------------------------------------------------

    def correct(self, text: str) -> tuple[str, float]:
        if text.count(_OCR_OPEN) != 1 or text.count(_OCR_CLOSE) != 1:
            raise CorrectRequestError("correct text must contain exactly one <ocr> span")
        match = _OCR_SPAN_RE.search(text)
        if match is None:
            raise CorrectRequestError("correct text must contain exactly one <ocr> span")
        inner = match.group(1)
        prefix_words = word_tokens(text[: match.start()])
        suffix_words = word_tokens(text[match.end():])
        prev = prefix_words[-1] if prefix_words else None
        nxt = suffix_words[0] if suffix_words else None

        span_words = word_tokens(inner)
        original = " ".join(span_words)
        if not span_words:
            return inner.strip(), 0.0

        candidates = [_Candidate(original, 0)]
        for word in self._vocab:
            if word == original:
                continue
            edits = _edit_distance(original, word, _MAX_EDITS)
            if edits <= _MAX_EDITS:
                candidates.append(_Candidate(word, edits))

        scored = sorted(
            ((self._candidate_logweight(cand, prev, nxt), cand.key) for cand in candidates),
            key=lambda pair: (-pair[0], pair[1]),
        )
        best_lw, best_key = scored[0]
        norm = best_lw
        for lw, _ in scored[1:]:
            norm = _logadd(norm, lw)
        posterior = math.exp(best_lw - norm)
        if best_key == original:
            return inner.strip(), posterior
        return self._carry_case(inner, best_key), posterior

    def _candidate_logweight(self, cand: _Candidate, prev: str | None, nxt: str | None) -> float:
        parts = cand.key.split(" ")
        total = cand.edits * _EDIT_PENALTY
        total += self.model.log_p_next(prev, parts[0]) if prev else self.model.log_p_word(parts[0])
        for a, b in zip(parts, parts[1:]):
            total += self.model.log_p_next(a, b)
        if nxt is not None:
            total += self.model.log_p_next(parts[-1], nxt)
        return total

    @staticmethod
    def _carry_case(original: str, replacement: str) -> str:
        stripped = original.strip()
        if stripped and stripped[0].isupper():
            return replacement[0].upper() + replacement[1:]
        return replacement
