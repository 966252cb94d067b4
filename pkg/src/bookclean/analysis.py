"""Corpus-level analysis: mined substitution tables and quality rollups.

Substitution mining walks rated differences.  When the losing side of a gap
is a single character, that character maps to the entire winning gap; when
both gaps have text, a character-level edit alignment contributes
letter-for-letter substitutions.  Directions always read
observed-error -> true-text, which is what a corrector needs to undo.
"""
from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Book, BookMeta
from .scoring import RatedPair

__all__ = [
    "QualityReport",
    "SubstitutionTable",
    "aggregate_quality",
    "char_substitutions",
    "mine_substitutions",
    "quality_from_pairs",
]


@dataclass
class SubstitutionTable:
    """Counts of observed-character -> true-string substitutions."""

    counts: dict[str, Counter] = field(default_factory=dict)

    def add(self, source: str, replacement: str, k: int = 1) -> None:
        self.counts.setdefault(source, Counter())[replacement] += k

    def total(self) -> int:
        return sum(sum(c.values()) for c in self.counts.values())

    def row_total(self, source: str) -> int:
        return sum(self.counts.get(source, Counter()).values())

    def row_share(self, source: str, replacement: str) -> float:
        total = self.row_total(source)
        if total == 0:
            return 0.0
        return self.counts[source].get(replacement, 0) / total

    def top(self, source: str, n: int = 1) -> list[tuple[str, int]]:
        row = self.counts.get(source)
        if not row:
            return []
        return sorted(row.items(), key=lambda kv: (-kv[1], kv[0]))[:n]

    def rows(self) -> list[tuple[str, str, int, float]]:
        """(source, replacement, count, normalized frequency) sorted rows.

        Frequencies are normalized over the whole table, so they compare
        across source characters and sum to 1.
        """
        grand = self.total()
        out = []
        for src in sorted(self.counts):
            for rep, count in sorted(self.counts[src].items(), key=lambda kv: (-kv[1], kv[0])):
                out.append((src, rep, count, count / grand if grand else 0.0))
        return out

    def patterns(self, max_patterns: int | None = None, min_count: int = 1) -> list[tuple[str, str]]:
        """(source, replacement) pairs ordered by global count."""
        flat = [
            (src, rep, count)
            for src, row in self.counts.items()
            for rep, count in row.items()
            if count >= min_count
        ]
        flat.sort(key=lambda t: (-t[2], t[0], t[1]))
        if max_patterns is not None:
            flat = flat[:max_patterns]
        return [(src, rep) for src, rep, _ in flat]

    def save_tsv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("source\treplacement\tcount\tnorm_freq\n")
            for src, rep, count, freq in self.rows():
                fh.write(f"{src}\t{rep}\t{count}\t{freq:.6f}\n")

    @classmethod
    def load_tsv(cls, path: str | Path) -> "SubstitutionTable":
        table = cls()
        lines = Path(path).read_text("utf-8").splitlines()
        for line in lines[1:]:
            if not line:
                continue
            src, rep, count, _ = line.split("\t")
            table.add(src, rep, int(count))
        return table


def char_substitutions(observed: str, true: str) -> list[tuple[str, str]]:
    """Character substitutions from one minimal edit script.

    Classic edit-distance DP; the backtrace prefers substitutions over
    indels so aligned letters pair up.  Only letter-for-letter differences
    are reported (case kept on the true side, folded on the observed side).
    """
    n, m = len(observed), len(true)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        oi = observed[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            cost = 0 if oi == true[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)
    out = []
    i, j = n, m
    while i > 0 and j > 0:
        cost = 0 if observed[i - 1] == true[j - 1] else 1
        if dist[i][j] == dist[i - 1][j - 1] + cost:
            if cost and observed[i - 1].isalpha():
                out.append((observed[i - 1].lower(), true[j - 1]))
            i -= 1
            j -= 1
        elif dist[i][j] == dist[i - 1][j] + 1:
            i -= 1
        else:
            j -= 1
    out.reverse()
    return out


def mine_substitutions(rated: Iterable[RatedPair]) -> SubstitutionTable:
    """Harvest substitution counts from rated differences.

    Ties are skipped (no trusted side).  Each gap pair contributes either
    one whole-gap event (single-character loser) or its character-level
    substitutions, never both.
    """
    table = SubstitutionTable()
    for rp in rated:
        if rp.tie:
            continue
        for gap in rp.record.gaps:
            if rp.winner == "a":
                loser, winner = gap.tokens_b, gap.tokens_a
            else:
                loser, winner = gap.tokens_a, gap.tokens_b
            if len(loser) == 1 and len(loser[0]) == 1 and loser[0].isalpha():
                table.add(loser[0].lower(), " ".join(winner))
                continue
            if loser and winner:
                for src, rep in char_substitutions(" ".join(loser), " ".join(winner)):
                    table.add(src, rep)
    return table


@dataclass(frozen=True)
class QualityReport:
    book_id: str
    quality: float
    sentence_count: int
    error_sentence_count: int


def quality_from_pairs(book: Book, lost_sentence_indices: Iterable[int]) -> QualityReport:
    """Quality = 1 - (sentences that lost a pairing) / sentences."""
    total = len(book.sentences)
    if total == 0:
        raise ValueError(f"book {book.book_id} has no sentences")
    lost = {i for i in lost_sentence_indices if 0 <= i < total}
    return QualityReport(book.book_id, 1.0 - len(lost) / total, total, len(lost))


def quality_from_detections(
    book: Book, flagged_sentence_indices: Iterable[int]
) -> QualityReport:
    """Same rollup, but erroneous = flagged by the detector."""
    return quality_from_pairs(book, flagged_sentence_indices)


def _modal_digitizer(values: Sequence[str]) -> str:
    counts = Counter(values)
    best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return best[0][0] if best else ""


def aggregate_quality(
    reports: Sequence[QualityReport],
    metas: Mapping[str, BookMeta],
) -> tuple[list[tuple], list[tuple]]:
    """Roll book quality up by source library and by publication year.

    Returns (library_rows, year_rows).  Library rows are
    (library, digitizer, count, mean_year, mean_quality) sorted best first;
    year rows are (year, mean_quality, count) in year order.
    """
    by_lib: dict[str, list[QualityReport]] = defaultdict(list)
    by_year: dict[int, list[float]] = defaultdict(list)
    for rep in reports:
        meta = metas[rep.book_id]
        by_lib[meta.source_library or ""].append(rep)
        if meta.pub_year is not None:
            by_year[meta.pub_year].append(rep.quality)

    lib_rows = []
    for lib, reps in by_lib.items():
        years = [metas[r.book_id].pub_year for r in reps if metas[r.book_id].pub_year]
        mean_year = sum(years) / len(years) if years else 0.0
        mean_q = sum(r.quality for r in reps) / len(reps)
        digitizer = _modal_digitizer([metas[r.book_id].digitizer.value for r in reps])
        lib_rows.append((lib, digitizer, len(reps), round(mean_year, 1), round(mean_q, 6)))
    lib_rows.sort(key=lambda r: (-r[4], r[0]))

    year_rows = [
        (year, round(sum(qs) / len(qs), 6), len(qs)) for year, qs in sorted(by_year.items())
    ]
    return lib_rows, year_rows


def write_quality_csv(path: str | Path, lib_rows: Sequence[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_library", "digitizer", "books", "mean_year", "mean_quality"])
        writer.writerows(lib_rows)


def write_year_csv(path: str | Path, year_rows: Sequence[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pub_year", "mean_quality", "books"])
        writer.writerows(year_rows)
