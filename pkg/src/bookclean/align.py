"""Token-level alignment of duplicate scans and difference extraction.

Pairs small enough for one DP table are aligned by exact LCS.  Larger
pairs are first cut by anchor tokens (tokens occurring exactly once in
each book) chained in order, with exact LCS between consecutive anchors,
so whole books align in seconds.  Segments too long on both sides fall
back to unique-bigram anchors, and as a last resort to greedy exact-run
matching flagged ``low_confidence``.
"""
from __future__ import annotations

import difflib
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Book

__all__ = [
    "AlignConfig",
    "AlignmentImpossible",
    "DifferenceRecord",
    "GapPair",
    "PairAlignment",
    "align_pair",
    "align_token_texts",
    "extract_anchors",
    "extract_differences",
    "lcs_pairs",
]


class AlignmentImpossible(Exception):
    """No anchor tokens and no anchor bigrams are shared by the two books."""


@dataclass(frozen=True)
class AlignConfig:
    # Segments longer than this on *both* sides recurse on bigram anchors
    # instead of running the quadratic DP.
    max_segment_tokens: int = 5000
    context_tokens: int = 3


@dataclass(frozen=True)
class PairAlignment:
    book_a_id: str
    book_b_id: str
    matches: tuple[tuple[int, int], ...]
    low_confidence: bool = False


def extract_anchors(book: Book) -> list[tuple[int, str]]:
    """Tokens occurring exactly once in the book, in document order.

    Case-sensitive; punctuation tokens are eligible.
    """
    texts = [t.text for t in book.tokens]
    counts = Counter(texts)
    return [(i, t) for i, t in enumerate(texts) if counts[t] == 1]


def _lis_chain(pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Longest chain with both coordinates strictly increasing.

    ``pairs`` must be sorted by first coordinate with distinct second
    coordinates; patience sorting gives O(n log n).
    """
    if not pairs:
        return []
    tails: list[int] = []
    tail_idx: list[int] = []
    parent = [-1] * len(pairs)
    for idx, (_, ib) in enumerate(pairs):
        k = bisect_left(tails, ib)
        if k == len(tails):
            tails.append(ib)
            tail_idx.append(idx)
        else:
            tails[k] = ib
            tail_idx[k] = idx
        if k > 0:
            parent[idx] = tail_idx[k - 1]
    out = []
    idx = tail_idx[-1]
    while idx != -1:
        out.append(pairs[idx])
        idx = parent[idx]
    out.reverse()
    return out


def _intern(a: Sequence[str], b: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    ids: dict[str, int] = {}
    aa = np.fromiter((ids.setdefault(t, len(ids)) for t in a), dtype=np.int64, count=len(a))
    bb = np.fromiter((ids.setdefault(t, len(ids)) for t in b), dtype=np.int64, count=len(b))
    return aa, bb


def _lcs_final_row(aa: np.ndarray, bb: np.ndarray) -> np.ndarray:
    row = np.zeros(len(bb) + 1, dtype=np.uint32)
    for x in aa:
        eq = bb == x
        tmp = np.maximum(row[1:], row[:-1] + eq)
        np.maximum.accumulate(tmp, out=tmp)
        row[1:] = tmp
    return row


def _lcs_table_pairs(aa: np.ndarray, bb: np.ndarray) -> list[tuple[int, int]]:
    """Exact LCS match pairs via a full DP table.

    Ties in the backtrace prefer the diagonal (take the match), then moving
    up in the first sequence; the choice is deterministic.
    """
    n, m = len(aa), len(bb)
    dtype = np.uint16 if min(n, m) < 0xFFFF else np.uint32
    table = np.zeros((n + 1, m + 1), dtype=dtype)
    for i in range(1, n + 1):
        prev = table[i - 1]
        eq = bb == aa[i - 1]
        tmp = np.maximum(prev[1:], prev[:-1] + eq.astype(dtype))
        np.maximum.accumulate(tmp, out=tmp)
        table[i, 1:] = tmp
    out: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 and j > 0:
        if aa[i - 1] == bb[j - 1] and table[i, j] == table[i - 1, j - 1] + 1:
            out.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    out.reverse()
    return out


# Above this many DP cells, switch to the linear-memory divide-and-conquer
# variant (same result count, ~2x the row work).
_TABLE_CELL_CAP = 40_000_000


def _hirschberg(aa: np.ndarray, bb: np.ndarray, a_off: int, b_off: int, out: list) -> None:
    n, m = len(aa), len(bb)
    if n == 0 or m == 0:
        return
    if (n + 1) * (m + 1) <= 1 << 16 or min(n, m) <= 2:
        out.extend((a_off + i, b_off + j) for i, j in _lcs_table_pairs(aa, bb))
        return
    i = n // 2
    top = _lcs_final_row(aa[:i], bb)
    bot = _lcs_final_row(aa[i:][::-1], bb[::-1])
    j = int(np.argmax(top + bot[::-1]))
    _hirschberg(aa[:i], bb[:j], a_off, b_off, out)
    _hirschberg(aa[i:], bb[j:], a_off + i, b_off + j, out)


def lcs_pairs(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """Match pairs of one exact longest common subsequence of ``a`` and ``b``.

    Shared prefixes and suffixes are peeled off first; that preserves
    optimality and keeps the DP to the differing core.
    """
    n, m = len(a), len(b)
    pre = 0
    while pre < n and pre < m and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < n - pre and suf < m - pre and a[n - 1 - suf] == b[m - 1 - suf]:
        suf += 1
    out = [(i, i) for i in range(pre)]
    core_a, core_b = a[pre : n - suf], b[pre : m - suf]
    if core_a and core_b:
        aa, bb = _intern(core_a, core_b)
        if (len(aa) + 1) * (len(bb) + 1) <= _TABLE_CELL_CAP:
            core = _lcs_table_pairs(aa, bb)
            out.extend((pre + i, pre + j) for i, j in core)
        else:
            _hirschberg(aa, bb, pre, pre, out)
    out.extend((n - suf + k, m - suf + k) for k in range(suf))
    return out


def _greedy_pairs(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    sm = difflib.SequenceMatcher(None, a, b, autojunk=False)
    out: list[tuple[int, int]] = []
    for i, j, size in sm.get_matching_blocks():
        out.extend((i + k, j + k) for k in range(size))
    return out


def _unique_bigram_pairs(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    ga = list(zip(a, a[1:]))
    gb = list(zip(b, b[1:]))
    ca, cb = Counter(ga), Counter(gb)
    pos_b = {g: i for i, g in enumerate(gb) if cb[g] == 1}
    pairs = [
        (i, pos_b[g])
        for i, g in enumerate(ga)
        if ca[g] == 1 and g in pos_b
    ]
    pairs.sort()
    return pairs


def _expand_bigram_chain(chain: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Turn a chain of matched bigram start positions into token matches."""
    pts: list[tuple[int, int]] = []
    last_a = last_b = -1
    for ia, ib in chain:
        for d in (0, 1):
            pa, pb = ia + d, ib + d
            if pa > last_a and pb > last_b:
                pts.append((pa, pb))
                last_a, last_b = pa, pb
    return pts


def _segment_align(
    a: Sequence[str], b: Sequence[str], cfg: AlignConfig, depth: int
) -> tuple[list[tuple[int, int]], bool]:
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return [], False
    if n > cfg.max_segment_tokens and m > cfg.max_segment_tokens:
        if depth >= 1:
            return _greedy_pairs(a, b), True
        pts = _expand_bigram_chain(_lis_chain(_unique_bigram_pairs(a, b)))
        if not pts:
            return _greedy_pairs(a, b), True
        return _stitch(a, b, pts, cfg, depth + 1)
    return lcs_pairs(a, b), False


def _stitch(
    a: Sequence[str],
    b: Sequence[str],
    anchor_points: list[tuple[int, int]],
    cfg: AlignConfig,
    depth: int,
) -> tuple[list[tuple[int, int]], bool]:
    """Align the stretches between consecutive anchor matches."""
    out: list[tuple[int, int]] = []
    low = False
    pa = pb = 0
    sentinel = (len(a), len(b))
    for ia, ib in anchor_points + [sentinel]:
        seg, seg_low = _segment_align(a[pa:ia], b[pb:ib], cfg, depth)
        out.extend((pa + i, pb + j) for i, j in seg)
        low = low or seg_low
        if (ia, ib) != sentinel:
            out.append((ia, ib))
        pa, pb = ia + 1, ib + 1
    return out, low


# Pairs with at most this many DP cells skip anchoring entirely and run
# one exact LCS; the anchor cascade only ever deals with book-sized pairs.
# Anchoring commits to every chained anchor match, which can cost a few
# matches when a token unique in both books descends from different spots
# of the underlying work, so exact DP is used wherever it is affordable.
_DIRECT_CELL_CAP = _TABLE_CELL_CAP


def align_token_texts(
    a: Sequence[str], b: Sequence[str], cfg: AlignConfig | None = None
) -> tuple[list[tuple[int, int]], bool]:
    """Align two token-text sequences; returns (match pairs, low_confidence).

    Raises ``AlignmentImpossible`` when the pair is too large for direct
    DP and the books share no anchor tokens and no anchor bigrams.
    """
    cfg = cfg or AlignConfig()
    if (len(a) + 1) * (len(b) + 1) <= _DIRECT_CELL_CAP:
        return lcs_pairs(a, b), False
    ca, cb = Counter(a), Counter(b)
    pos_b = {t: i for i, t in enumerate(b) if cb[t] == 1}
    anchors = sorted(
        (i, pos_b[t]) for i, t in enumerate(a) if ca[t] == 1 and t in pos_b
    )
    chain = _lis_chain(anchors)
    if chain:
        return _stitch(a, b, chain, cfg, 0)
    pts = _expand_bigram_chain(_lis_chain(_unique_bigram_pairs(a, b)))
    if not pts:
        raise AlignmentImpossible("no shared anchor tokens or anchor bigrams")
    return _stitch(a, b, pts, cfg, 1)


def align_pair(book_a: Book, book_b: Book, config: AlignConfig | None = None) -> PairAlignment:
    """Align two books token-by-token.

    Internally the pair is ordered by book_id before aligning, so swapping
    the arguments yields the exact mirror image of the match set.
    """
    cfg = config or AlignConfig()
    if book_a.book_id <= book_b.book_id:
        matches, low = align_token_texts(book_a.token_texts(), book_b.token_texts(), cfg)
    else:
        rev, low = align_token_texts(book_b.token_texts(), book_a.token_texts(), cfg)
        matches = [(j, i) for i, j in rev]
    return PairAlignment(book_a.book_id, book_b.book_id, tuple(matches), low)


@dataclass(frozen=True)
class GapPair:
    """One maximal unmatched stretch, in sentence-local token coordinates."""

    a_start: int
    a_end: int
    b_start: int
    b_end: int
    tokens_a: tuple[str, ...]
    tokens_b: tuple[str, ...]


@dataclass(frozen=True)
class DifferenceRecord:
    """A difference between two scans, with its sentence pair for context.

    Gaps that land in the same sentence pair are merged into one record;
    ``gaps`` keeps the individual stretches.  Gap coordinates are relative
    to the rendered sentences (``sentence_a.split(" ")``).
    """

    book_a_id: str
    book_b_id: str
    sentence_a: str
    sentence_b: str
    sent_range_a: tuple[int, int]
    sent_range_b: tuple[int, int]
    sent_tokens_a: tuple[int, int]
    sent_tokens_b: tuple[int, int]
    gaps: tuple[GapPair, ...]
    context_before: tuple[str, ...]
    context_after: tuple[str, ...]
    low_confidence: bool = False

    @property
    def span_a(self) -> tuple[int, int]:
        return (self.gaps[0].a_start, self.gaps[-1].a_end)

    @property
    def span_b(self) -> tuple[int, int]:
        return (self.gaps[0].b_start, self.gaps[-1].b_end)

    def gap_texts_a(self) -> list[str]:
        return [t for g in self.gaps for t in g.tokens_a]

    def gap_texts_b(self) -> list[str]:
        return [t for g in self.gaps for t in g.tokens_b]


def _gap_sent_range(book: Book, lo: int, hi: int) -> tuple[int, int]:
    if hi > lo:
        return (book.sentence_index_of(lo), book.sentence_index_of(hi - 1) + 1)
    p = min(max(lo, 0), len(book.tokens) - 1)
    s = book.sentence_index_of(p)
    return (s, s + 1)


def _ranges_touch(x: tuple[int, int], y: tuple[int, int]) -> bool:
    return x[0] < y[1] and y[0] < x[1]


def extract_differences(
    alignment: PairAlignment,
    book_a: Book,
    book_b: Book,
    config: AlignConfig | None = None,
) -> list[DifferenceRecord]:
    """One record per maximal gap, merged when gaps share a sentence pair."""
    cfg = config or AlignConfig()
    if alignment.book_a_id != book_a.book_id or alignment.book_b_id != book_b.book_id:
        raise ValueError("alignment does not belong to these books")
    if not book_a.tokens or not book_b.tokens:
        return []

    texts_a = book_a.token_texts()
    texts_b = book_b.token_texts()
    events: list[tuple[tuple[int, int], tuple[int, int]]] = []
    prev_a = prev_b = -1
    for ia, ib in list(alignment.matches) + [(len(texts_a), len(texts_b))]:
        ga = (prev_a + 1, ia)
        gb = (prev_b + 1, ib)
        if ga[1] > ga[0] or gb[1] > gb[0]:
            events.append((ga, gb))
        prev_a, prev_b = ia, ib

    # Group consecutive events whose sentence ranges intersect on both sides.
    groups: list[list[tuple]] = []
    for ga, gb in events:
        sa = _gap_sent_range(book_a, *ga)
        sb = _gap_sent_range(book_b, *gb)
        if groups:
            _, _, psa, psb = groups[-1][-1]
            if _ranges_touch(sa, psa) and _ranges_touch(sb, psb):
                groups[-1].append((ga, gb, sa, sb))
                continue
        groups.append([(ga, gb, sa, sb)])

    ctx = cfg.context_tokens
    records: list[DifferenceRecord] = []
    for group in groups:
        sent_a = (min(g[2][0] for g in group), max(g[2][1] for g in group))
        sent_b = (min(g[3][0] for g in group), max(g[3][1] for g in group))
        tok_a = (book_a.sentences[sent_a[0]][0], book_a.sentences[sent_a[1] - 1][1])
        tok_b = (book_b.sentences[sent_b[0]][0], book_b.sentences[sent_b[1] - 1][1])
        gaps = tuple(
            GapPair(
                ga[0] - tok_a[0],
                ga[1] - tok_a[0],
                gb[0] - tok_b[0],
                gb[1] - tok_b[0],
                tuple(texts_a[ga[0] : ga[1]]),
                tuple(texts_b[gb[0] : gb[1]]),
            )
            for ga, gb, _, _ in group
        )
        first_a = group[0][0][0]
        last_a = group[-1][0][1]
        records.append(
            DifferenceRecord(
                book_a_id=book_a.book_id,
                book_b_id=book_b.book_id,
                sentence_a=" ".join(texts_a[tok_a[0] : tok_a[1]]),
                sentence_b=" ".join(texts_b[tok_b[0] : tok_b[1]]),
                sent_range_a=sent_a,
                sent_range_b=sent_b,
                sent_tokens_a=tok_a,
                sent_tokens_b=tok_b,
                gaps=gaps,
                context_before=tuple(texts_a[max(0, first_a - ctx) : first_a]),
                context_after=tuple(texts_a[last_a : last_a + ctx]),
                low_confidence=alignment.low_confidence,
            )
        )
    return records
