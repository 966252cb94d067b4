"""Choosing the best copy of a work from pairwise sentence verdicts.

For two books compared over n rated differences with confidences
(p_i, q_i), p_i + q_i = 1:

    majority prior for book 1:  count(p_i > q_i) / n   (ties count for neither)
    log posterior for book 1:   sum_i ln p_i + ln(prior)

A zero prior is floored to 1/(n+1) so one side never vanishes outright.
Groups larger than two run a deterministic single-elimination tournament.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .align import AlignConfig, AlignmentImpossible, align_pair, extract_differences
from .corpus import Book
from .dedup import DuplicateSet
from .scoring import RatedPair, Scorer, rate_pair

__all__ = [
    "BookComparison",
    "CanonicalResult",
    "EmptyComparison",
    "MatchRecord",
    "build_comparison",
    "compare_books",
    "golden_eval",
    "log_posterior",
    "majority_prior",
    "tournament",
]


class EmptyComparison(Exception):
    """Raised when a comparison would be computed over zero rated pairs."""


def majority_prior(pairs: Sequence[tuple[float, float]]) -> float:
    """Fraction of pairs preferring side 1.  Exact ties count for neither
    side but stay in the denominator."""
    if not pairs:
        raise EmptyComparison("no rated pairs")
    return sum(1 for p, q in pairs if p > q) / len(pairs)


def _floored_prior(count: int, n: int) -> float:
    return count / n if count > 0 else 1.0 / (n + 1)


def log_posterior(pairs: Sequence[tuple[float, float]], for_book: int) -> float:
    """Unnormalized log posterior that the given side (1 or 2) is correct."""
    if for_book not in (1, 2):
        raise ValueError("for_book must be 1 or 2")
    if not pairs:
        raise EmptyComparison("no rated pairs")
    n = len(pairs)
    if for_book == 1:
        total = sum(math.log(p) for p, _ in pairs)
        wins = sum(1 for p, q in pairs if p > q)
    else:
        total = sum(math.log(q) for _, q in pairs)
        wins = sum(1 for p, q in pairs if q > p)
    return total + math.log(_floored_prior(wins, n))


@dataclass(frozen=True)
class BookComparison:
    book1_id: str
    book2_id: str
    n: int
    pairs: tuple[tuple[float, float], ...]
    majority_1: float | None
    log_posterior_1: float | None
    log_posterior_2: float | None
    winner: str
    no_evidence: bool = False


def build_comparison(
    book1_id: str, book2_id: str, pairs: Sequence[tuple[float, float]]
) -> BookComparison:
    """Aggregate oriented (p, q) pairs into a winner.

    With no pairs at all there is nothing to judge: the lexicographically
    smaller id wins, flagged ``no_evidence``.  Exact posterior ties resolve
    the same way.
    """
    if not pairs:
        return BookComparison(
            book1_id, book2_id, 0, (), None, None, None,
            winner=min(book1_id, book2_id), no_evidence=True,
        )
    lp1 = log_posterior(pairs, 1)
    lp2 = log_posterior(pairs, 2)
    if lp1 > lp2:
        winner = book1_id
    elif lp2 > lp1:
        winner = book2_id
    else:
        winner = min(book1_id, book2_id)
    return BookComparison(
        book1_id, book2_id, len(pairs), tuple(pairs),
        majority_prior(pairs), lp1, lp2, winner,
    )


def compare_books(
    book_a: Book,
    book_b: Book,
    scorer: Scorer,
    align_config: AlignConfig | None = None,
    seed: int = 0,
) -> tuple[BookComparison, list[RatedPair]]:
    """Align, extract differences, rate each, and aggregate.

    ``AlignmentImpossible`` propagates to the caller.  Identical books (no
    differences) produce a ``no_evidence`` comparison.
    """
    alignment = align_pair(book_a, book_b, align_config)
    records = extract_differences(alignment, book_a, book_b, align_config)
    rated = [rate_pair(r, scorer, seed) for r in records]
    pairs = [(r.p, r.q) for r in rated]
    return build_comparison(book_a.book_id, book_b.book_id, pairs), rated


@dataclass(frozen=True)
class MatchRecord:
    """One tournament pairing; ``b`` is None for a bye."""

    a: str
    b: str | None
    winner: str
    lp_a: float | None = None
    lp_b: float | None = None
    flag: str = ""  # "", "bye", "no_evidence", "alignment_failed"


@dataclass(frozen=True)
class CanonicalResult:
    set_id: str
    canonical_book_id: str
    bracket: tuple[tuple[MatchRecord, ...], ...]


def tournament(
    dset: DuplicateSet,
    compare: Callable[[str, str], BookComparison],
) -> CanonicalResult:
    """Single-elimination over the set's members, sorted by book_id.

    Members are paired in sorted order each round; an odd book out gets a
    bye.  ``compare`` may raise ``AlignmentImpossible``; that match falls to
    the lexicographically smaller id and is flagged.
    """
    current = dset.sorted_members()
    if not current:
        raise ValueError(f"duplicate set {dset.set_id} has no members")
    rounds: list[tuple[MatchRecord, ...]] = []
    while len(current) > 1:
        matches: list[MatchRecord] = []
        nxt: list[str] = []
        for i in range(0, len(current) - 1, 2):
            a, b = current[i], current[i + 1]
            try:
                comp = compare(a, b)
            except AlignmentImpossible:
                matches.append(MatchRecord(a, b, min(a, b), flag="alignment_failed"))
                nxt.append(min(a, b))
                continue
            lp_a = comp.log_posterior_1 if comp.book1_id == a else comp.log_posterior_2
            lp_b = comp.log_posterior_2 if comp.book1_id == a else comp.log_posterior_1
            flag = "no_evidence" if comp.no_evidence else ""
            matches.append(MatchRecord(a, b, comp.winner, lp_a, lp_b, flag))
            nxt.append(comp.winner)
        if len(current) % 2 == 1:
            bye = current[-1]
            matches.append(MatchRecord(bye, None, bye, flag="bye"))
            nxt.append(bye)
        rounds.append(tuple(matches))
        current = sorted(nxt)
    return CanonicalResult(dset.set_id, current[0], tuple(rounds))


def golden_eval(
    golden_pairs: Sequence[tuple[str, str]],
    compare: Callable[[str, str], BookComparison],
) -> float:
    """Fraction of (truth, scan) pairs where the designated truth side wins."""
    if not golden_pairs:
        raise ValueError("no golden pairs to evaluate")
    wins = 0
    for truth_id, scan_id in golden_pairs:
        comp = compare(truth_id, scan_id)
        wins += comp.winner == truth_id
    return wins / len(golden_pairs)
