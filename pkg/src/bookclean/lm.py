"""Word n-gram language model with additive backoff interpolation.

Orders 1 through 5.  The default smoothing interpolates each order with the
next lower one:

    P_n(w | h) = (c(h w) + alpha * V * P_{n-1}(w | h[1:])) / (c(h) + alpha * V)

which sums to one over the vocabulary for every history.  Training-set
singletons map to ``<unk>``.  Interpolated Kneser-Ney is available as a
config option.  Sentence scores are mean log probabilities (natural log),
so lengths are comparable.
"""
from __future__ import annotations

import math
import pickle
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = ["NgramConfig", "NgramLM", "train_ngram"]

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"


@dataclass(frozen=True)
class NgramConfig:
    order: int = 3
    alpha: float = 0.1
    min_count: int = 2
    smoothing: str = "add_alpha"  # "add_alpha" | "kneser_ney"
    discount: float = 0.75

    def validate(self) -> None:
        if not 1 <= self.order <= 5:
            raise ValueError(f"order must be in 1..5, got {self.order}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.smoothing not in ("add_alpha", "kneser_ney"):
            raise ValueError(f"unknown smoothing {self.smoothing!r}")
        if not 0 < self.discount < 1:
            raise ValueError("discount must be in (0, 1)")


class NgramLM:
    def __init__(self, config: NgramConfig) -> None:
        config.validate()
        self.config = config
        self.vocab: set[str] = set()
        # counts[n] maps n-gram tuples to counts; ctx[n] maps (n-1)-histories
        # to their total continuations, built while counting so BOS-padded
        # histories are included.
        self.counts: list[dict] = []
        self.ctx: list[dict] = []
        self.cont: list[dict] = []        # continuation counts for KN
        self.cont_ctx: list[dict] = []
        self.distinct_after: list[dict] = []
        self.cont_distinct_after: list[dict] = []
        self._uni_total = 0

    # -- training ---------------------------------------------------------

    def fit(self, sentences: Iterable[Sequence[str]]) -> "NgramLM":
        sentences = [list(s) for s in sentences]
        if not any(sentences):
            raise ValueError("cannot train on an empty corpus")
        k = self.config.order
        raw = Counter(t for s in sentences for t in s)
        self.vocab = {t for t, c in raw.items() if c >= self.config.min_count}
        self.vocab.update((UNK, EOS))

        counts = [Counter() for _ in range(k + 1)]  # index by order
        ctx = [Counter() for _ in range(k + 1)]
        for s in sentences:
            seq = [BOS] * (k - 1) + [self._map(t) for t in s] + [EOS]
            for n in range(1, k + 1):
                start = max(0, k - n)  # skip all-BOS prefixes shorter orders would double count
                for i in range(start, len(seq) - n + 1):
                    gram = tuple(seq[i : i + n])
                    if gram[-1] == BOS:
                        continue  # never predict BOS
                    counts[n][gram] += 1
                    ctx[n][gram[:-1]] += 1
        self.counts = [dict(c) for c in counts]
        self.ctx = [dict(c) for c in ctx]
        self._uni_total = sum(self.counts[1].values())
        if self.config.smoothing == "kneser_ney":
            self._build_kn_tables()
        return self

    def _build_kn_tables(self) -> None:
        k = self.config.order
        self.cont = [dict() for _ in range(k + 1)]
        self.cont_ctx = [dict() for _ in range(k + 1)]
        self.distinct_after = [dict() for _ in range(k + 1)]
        self.cont_distinct_after = [dict() for _ in range(k + 1)]
        for n in range(1, k + 1):
            distinct = defaultdict(int)
            for gram in self.counts[n]:
                distinct[gram[:-1]] += 1
            self.distinct_after[n] = dict(distinct)
        # continuation counts: number of distinct left extensions
        for n in range(1, k):
            seen = defaultdict(set)
            for gram in self.counts[n + 1]:
                seen[gram[1:]].add(gram[0])
            cont = {g: len(v) for g, v in seen.items()}
            self.cont[n] = cont
            cont_ctx = defaultdict(int)
            cont_distinct = defaultdict(int)
            for g, c in cont.items():
                cont_ctx[g[:-1]] += c
                cont_distinct[g[:-1]] += 1
            self.cont_ctx[n] = dict(cont_ctx)
            self.cont_distinct_after[n] = dict(cont_distinct)

    def _map(self, token: str) -> str:
        return token if token in self.vocab else UNK

    # -- probabilities ----------------------------------------------------

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def prob(self, token: str, history: Sequence[str]) -> float:
        """P(token | history); history may be shorter than order-1."""
        w = self._map(token)
        k = self.config.order
        hist = [BOS] * max(0, (k - 1) - len(history)) + [
            self._map(t) if t != BOS else BOS for t in history
        ]
        hist = tuple(hist[len(hist) - (k - 1) :]) if k > 1 else ()
        if self.config.smoothing == "kneser_ney":
            return self._prob_kn(w, hist, k)
        return self._prob_add(w, hist)

    def _prob_add(self, w: str, hist: tuple) -> float:
        n = len(hist) + 1
        alpha = self.config.alpha
        v = self.vocab_size
        if n == 1:
            return (self.counts[1].get((w,), 0) + alpha) / (self._uni_total + alpha * v)
        lower = self._prob_add(w, hist[1:])
        num = self.counts[n].get(hist + (w,), 0)
        den = self.ctx[n].get(hist, 0)
        return (num + alpha * v * lower) / (den + alpha * v)

    def _prob_kn(self, w: str, hist: tuple, k: int) -> float:
        n = len(hist) + 1
        alpha = self.config.alpha
        v = self.vocab_size
        if n == 1:
            # continuation unigram with an additive floor so unseen events
            # (e.g. <unk> when training had no singletons) keep mass
            cont = self.cont[1].get((w,), 0) if self.cont else 0
            total = sum(self.cont[1].values()) if self.cont and self.cont[1] else 0
            return (cont + alpha) / (total + alpha * v)
        d = self.config.discount
        if n == k:
            c = self.counts[n].get(hist + (w,), 0)
            den = self.ctx[n].get(hist, 0)
            distinct = self.distinct_after[n].get(hist, 0)
        else:
            c = self.cont[n].get(hist + (w,), 0)
            den = self.cont_ctx[n].get(hist, 0)
            distinct = self.cont_distinct_after[n].get(hist, 0)
        lower = self._prob_kn(w, hist[1:], k)
        if den == 0:
            return lower
        return max(c - d, 0.0) / den + (d * distinct / den) * lower

    # -- scoring ----------------------------------------------------------

    def token_logprobs(self, tokens: Sequence[str]) -> list[float]:
        k = self.config.order
        hist: tuple = tuple([BOS] * (k - 1))
        out = []
        for t in tokens:
            w = self._map(t)
            if self.config.smoothing == "kneser_ney":
                p = self._prob_kn(w, hist, k)
            else:
                p = self._prob_add(w, hist)
            out.append(math.log(p))
            if k > 1:
                hist = (hist + (w,))[1:]
        return out

    def sentence_logprob_total(self, tokens: Sequence[str]) -> float:
        return sum(self.token_logprobs(tokens))

    def sentence_logprob(self, tokens: Sequence[str]) -> float:
        """Mean log probability per token; 0.0 for an empty sentence."""
        if not tokens:
            return 0.0
        return self.sentence_logprob_total(tokens) / len(tokens)

    def perplexity(self, sentences: Iterable[Sequence[str]]) -> float:
        total = 0.0
        count = 0
        for s in sentences:
            total += self.sentence_logprob_total(s)
            count += len(s)
        if count == 0:
            raise ValueError("no tokens to evaluate")
        return math.exp(-total / count)

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "format": "bookclean-ngram-v1",
            "config": self.config,
            # sorted so the pickled bytes don't depend on set iteration order
            "vocab": tuple(sorted(self.vocab)),
            "counts": self.counts,
            "ctx": self.ctx,
            "cont": self.cont,
            "cont_ctx": self.cont_ctx,
            "distinct_after": self.distinct_after,
            "cont_distinct_after": self.cont_distinct_after,
            "uni_total": self._uni_total,
        }
        with open(path, "wb") as fh:
            pickle.dump(payload, fh, protocol=4)

    @classmethod
    def load(cls, path: str | Path) -> "NgramLM":
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
        if payload.get("format") != "bookclean-ngram-v1":
            raise ValueError(f"{path} is not a saved n-gram model")
        lm = cls(payload["config"])
        lm.vocab = set(payload["vocab"])
        lm.counts = payload["counts"]
        lm.ctx = payload["ctx"]
        lm.cont = payload["cont"]
        lm.cont_ctx = payload["cont_ctx"]
        lm.distinct_after = payload["distinct_after"]
        lm.cont_distinct_after = payload["cont_distinct_after"]
        lm._uni_total = payload["uni_total"]
        return lm


def train_ngram(books, config: NgramConfig | None = None) -> NgramLM:
    """Train on every sentence of every book (token texts, case preserved)."""
    config = config or NgramConfig()
    sentences = []
    for book in books:
        for lo, hi in book.sentences:
            sentences.append([t.text for t in book.tokens[lo:hi]])
    return NgramLM(config).fit(sentences)
