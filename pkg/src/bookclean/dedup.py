"""Duplicate-scan grouping via five-gram overlap and connected components.

Books are blocked by normalized author, compared pairwise by hashed
five-gram overlap within each block, and grouped as connected components.
Anthologies (one volume containing several works) are detected per group,
set aside, and the survivors are re-clustered once.
"""
from __future__ import annotations

import hashlib
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Book, tokenize

__all__ = [
    "DEFAULT_ANTHOLOGY_PATTERNS",
    "DEFAULT_OVERLAP_THRESHOLD",
    "DuplicateSet",
    "FiveGramSet",
    "UnionFind",
    "build_fivegrams",
    "cluster",
    "cluster_and_filter",
    "filter_anthologies",
    "normalize_author",
    "overlap",
]

DEFAULT_OVERLAP_THRESHOLD = 0.5

# Title prefixes that mark collected volumes.  Matched case-insensitively
# against the full title; a config file may supply its own list.
DEFAULT_ANTHOLOGY_PATTERNS = (
    "works",
    "the works of",
    "the complete works",
    "the complete writings of",
    "the writings of",
    "the novels of",
    "the collected works",
    "collected works",
    "novels and tales",
)


def _hash64(s: str) -> int:
    # blake2b is stable across processes and platforms, unlike hash().
    return int.from_bytes(hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class FiveGramSet:
    book_id: str
    token_count: int
    grams: frozenset[int]


def build_fivegrams(book: Book) -> FiveGramSet:
    """Hash every case-folded five-token window of the book."""
    texts = [t.text.casefold() for t in book.tokens]
    grams = {_hash64(" ".join(texts[i : i + 5])) for i in range(len(texts) - 4)}
    return FiveGramSet(book.book_id, len(texts), frozenset(grams))


def overlap(a: FiveGramSet, b: FiveGramSet, metric: str = "containment_min") -> float:
    """Five-gram overlap in [0, 1]; 0.0 when either set is empty."""
    if not a.grams or not b.grams:
        return 0.0
    inter = len(a.grams & b.grams)
    if metric == "containment_min":
        return inter / min(len(a.grams), len(b.grams))
    if metric == "jaccard":
        return inter / len(a.grams | b.grams)
    raise ValueError(f"unknown overlap metric {metric!r}")


_NON_ALNUM = re.compile(r"[^\w\s]+", re.UNICODE)


def normalize_author(author: str) -> str:
    """Blocking key: case-folded, punctuation stripped, whitespace collapsed."""
    folded = _NON_ALNUM.sub(" ", author.casefold())
    return " ".join(folded.split())


class UnionFind:
    """Disjoint sets over arbitrary hashable keys, with path halving."""

    def __init__(self) -> None:
        self.parent: dict = {}
        self.rank: dict = {}

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            self.rank[x] = 0
            return x
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1

    def groups(self) -> list[list]:
        by_root = defaultdict(list)
        for x in self.parent:
            by_root[self.find(x)].append(x)
        return list(by_root.values())


@dataclass(frozen=True)
class DuplicateSet:
    """One group of scans believed to be the same work.

    ``anthology_book_ids`` records books that were pulled out of the group as
    collected volumes; they are not members.
    """

    set_id: str
    member_book_ids: frozenset[str]
    anthology_book_ids: frozenset[str] = frozenset()

    def sorted_members(self) -> list[str]:
        return sorted(self.member_book_ids)


def _components(
    gram_sets: Mapping[str, FiveGramSet],
    blocks: Iterable[Sequence[str]],
    threshold: float,
    metric: str,
) -> list[list[str]]:
    uf = UnionFind()
    for book_id in gram_sets:
        uf.find(book_id)
    for block in blocks:
        ids = sorted(block)
        for i in range(len(ids)):
            gi = gram_sets[ids[i]]
            for j in range(i + 1, len(ids)):
                if overlap(gi, gram_sets[ids[j]], metric) >= threshold:
                    uf.union(ids[i], ids[j])
    return [sorted(g) for g in uf.groups()]


def _make_set(members: Iterable[str], anthologies: Iterable[str] = ()) -> DuplicateSet:
    members = frozenset(members)
    return DuplicateSet(min(members), members, frozenset(anthologies))


def cluster(
    books: Sequence[Book],
    threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    metric: str = "containment_min",
) -> list[DuplicateSet]:
    """Group books into duplicate sets.

    Comparisons happen only within author blocks (books with an empty
    normalized author share one block).  Connected components make the
    result independent of comparison order.
    """
    gram_sets = {b.book_id: build_fivegrams(b) for b in books}
    blocks = defaultdict(list)
    for b in books:
        blocks[normalize_author(b.meta.author)].append(b.book_id)
    comps = _components(gram_sets, blocks.values(), threshold, metric)
    return sorted((_make_set(c) for c in comps), key=lambda s: s.set_id)


def _title_words(title: str) -> frozenset[str]:
    return frozenset(t.text.casefold() for t in tokenize(title) if t.is_word)


def _detect_anthologies(
    dset: DuplicateSet,
    books: Mapping[str, Book],
    patterns: Sequence[str],
) -> set[str]:
    members = dset.sorted_members()
    if len(members) < 2:
        return set()
    folded = [p.casefold() for p in patterns]
    words = {m: _title_words(books[m].meta.title) for m in members}
    counts = {m: len(books[m].tokens) for m in members}
    flagged: set[str] = set()
    for x in members:
        title = books[x].meta.title.casefold().strip()
        if any(title.startswith(p) for p in folded):
            flagged.add(x)
            continue
        for y in members:
            if y == x:
                continue
            if words[x].isdisjoint(words[y]) and counts[x] > counts[y]:
                flagged.add(x)
                break
    return flagged


def filter_anthologies(
    dset: DuplicateSet,
    books: Mapping[str, Book],
    threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    metric: str = "containment_min",
    patterns: Sequence[str] = DEFAULT_ANTHOLOGY_PATTERNS,
) -> list[DuplicateSet]:
    """Pull anthologies out of one duplicate set and re-cluster the rest.

    Removing the volume that glued two works together can split the group,
    so this may return several sets.  Flagged ids are attached to the
    first surviving set (ordered by set_id) for audit.  If every member was
    flagged, each becomes its own single-member set carrying its flag.
    """
    flagged = _detect_anthologies(dset, books, patterns)
    if not flagged:
        return [dset]
    survivors = dset.member_book_ids - flagged
    if not survivors:
        return [_make_set({x}, {x}) for x in sorted(flagged)]
    gram_sets = {m: build_fivegrams(books[m]) for m in survivors}
    comps = _components(gram_sets, [sorted(survivors)], threshold, metric)
    out = sorted((_make_set(c) for c in comps), key=lambda s: s.set_id)
    out[0] = DuplicateSet(
        out[0].set_id,
        out[0].member_book_ids,
        out[0].anthology_book_ids | flagged,
    )
    return out


def cluster_and_filter(
    books: Sequence[Book],
    threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    metric: str = "containment_min",
    patterns: Sequence[str] = DEFAULT_ANTHOLOGY_PATTERNS,
) -> list[DuplicateSet]:
    """Full grouping pass: cluster, filter anthologies, re-cluster once."""
    by_id = {b.book_id: b for b in books}
    out: list[DuplicateSet] = []
    for dset in cluster(books, threshold, metric):
        out.extend(filter_anthologies(dset, by_id, threshold, metric, patterns))
    return sorted(out, key=lambda s: s.set_id)
