"""Plain-text book ingestion: metadata parsing, tokenization, sentences.

A corpus is a directory of UTF-8 ``<book_id>.txt`` files plus a metadata CSV.
Text is normalized to NFC at load time; tokenization and sentence
segmentation are pure functions of the normalized text, so a ``Book`` can be
rebuilt byte-for-byte identically from the same inputs.
"""
from __future__ import annotations

import csv
import re
import unicodedata
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "Book",
    "BookMeta",
    "CorpusError",
    "CorpusLoad",
    "Digitizer",
    "METADATA_COLUMNS",
    "SkipEntry",
    "Token",
    "load_corpus",
    "parse_metadata",
    "segment_sentences",
    "tokenize",
]


class CorpusError(Exception):
    """Fatal problem with corpus input files (malformed metadata, bad UTF-8)."""


class Digitizer(str, Enum):
    GOOGLE = "google"
    INTERNET_ARCHIVE = "internet_archive"
    LOCAL = "local"
    UNKNOWN = "unknown"


# Codes accepted in the metadata CSV. An empty cell means unknown.
_DIGITIZER_BY_CODE = {
    "google": Digitizer.GOOGLE,
    "ia": Digitizer.INTERNET_ARCHIVE,
    "local": Digitizer.LOCAL,
    "": Digitizer.UNKNOWN,
}

METADATA_COLUMNS = ["book_id", "title", "author", "pub_year", "source_library", "digitizer"]

_YEAR_RANGE = (1000, 2100)


@dataclass(frozen=True)
class BookMeta:
    book_id: str
    title: str
    author: str = ""
    pub_year: int | None = None
    source_library: str | None = None
    digitizer: Digitizer = Digitizer.UNKNOWN


@dataclass(frozen=True)
class Token:
    """One token with its half-open character span in the source text."""

    text: str
    char_start: int
    char_end: int
    is_word: bool


# Word tokens are maximal letter runs, keeping internal apostrophes so
# contractions stay whole ("isn't", "don’t").  A digit run is one token.
# Every other non-whitespace character stands alone.
_TOKEN_RE = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*|\d+|\S")


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into word, number, and symbol tokens.

    Offsets index into ``text`` itself: for every token,
    ``text[tok.char_start:tok.char_end] == tok.text``.  Case is preserved.
    """
    out: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        t = m.group()
        out.append(Token(t, m.start(), m.end(), t[0].isalpha()))
    return out


_SENTENCE_END = frozenset(".!?")
_OPEN_QUOTES = frozenset("\"'`“‘")


def segment_sentences(tokens: Sequence[Token]) -> list[tuple[int, int]]:
    """Group tokens into sentences; returns half-open token index ranges.

    A ``.``, ``!`` or ``?`` ends a sentence when followed by end of text, a
    token starting with an uppercase letter, or an opening quote.  Anything
    left over after the last break forms the final sentence, so every token
    belongs to exactly one range.
    """
    bounds: list[tuple[int, int]] = []
    start = 0
    n = len(tokens)
    for i, tok in enumerate(tokens):
        if tok.text not in _SENTENCE_END:
            continue
        if i + 1 == n:
            bounds.append((start, i + 1))
            start = i + 1
        else:
            lead = tokens[i + 1].text[0]
            if lead.isupper() or lead in _OPEN_QUOTES:
                bounds.append((start, i + 1))
                start = i + 1
    if start < n:
        bounds.append((start, n))
    return bounds


@dataclass(frozen=True)
class Book:
    meta: BookMeta
    raw_text: str
    tokens: tuple[Token, ...]
    sentences: tuple[tuple[int, int], ...]

    @classmethod
    def from_text(cls, meta: BookMeta, raw_text: str) -> "Book":
        toks = tuple(tokenize(raw_text))
        return cls(meta, raw_text, toks, tuple(segment_sentences(toks)))

    @classmethod
    def from_text_id(cls, book_id: str, raw_text: str) -> "Book":
        """Book with stub metadata, for texts outside the catalogued corpus."""
        return cls.from_text(BookMeta(book_id=book_id, title=book_id), raw_text)

    @property
    def book_id(self) -> str:
        return self.meta.book_id

    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def sentence_token_range(self, idx: int) -> tuple[int, int]:
        return self.sentences[idx]

    def sentence_text(self, idx: int) -> str:
        lo, hi = self.sentences[idx]
        return " ".join(t.text for t in self.tokens[lo:hi])

    def sentence_index_of(self, token_index: int) -> int:
        """Index of the sentence containing ``token_index``."""
        if not self.sentences:
            raise IndexError("book has no sentences")
        starts = [lo for lo, _ in self.sentences]
        i = bisect_right(starts, token_index) - 1
        return max(i, 0)


def _parse_year(raw: str, where: str) -> int | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        year = int(raw)
    except ValueError as exc:
        raise CorpusError(f"{where}: pub_year {raw!r} is not an integer") from exc
    lo, hi = _YEAR_RANGE
    if not lo <= year <= hi:
        raise CorpusError(f"{where}: pub_year {year} outside plausible range {lo}..{hi}")
    return year


def parse_metadata(path: str | Path) -> list[BookMeta]:
    """Read the metadata CSV; raises ``CorpusError`` on any malformed row."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except FileNotFoundError as exc:
        raise CorpusError(f"metadata file not found: {path}") from exc
    except UnicodeDecodeError as exc:
        raise CorpusError(f"metadata file {path} is not valid UTF-8") from exc

    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration as exc:
        raise CorpusError(f"metadata file {path} is empty") from exc
    if header != METADATA_COLUMNS:
        raise CorpusError(
            f"metadata header must be {','.join(METADATA_COLUMNS)}; got {','.join(header)}"
        )

    metas: list[BookMeta] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        where = f"{path}:{lineno}"
        if len(row) != len(METADATA_COLUMNS):
            raise CorpusError(f"{where}: expected {len(METADATA_COLUMNS)} columns, got {len(row)}")
        book_id, title, author, year_raw, library, digitizer_raw = (c.strip() for c in row)
        if not book_id:
            raise CorpusError(f"{where}: empty book_id")
        if book_id in seen:
            raise CorpusError(f"{where}: duplicate book_id {book_id!r}")
        if not title:
            raise CorpusError(f"{where}: empty title for {book_id!r}")
        if digitizer_raw not in _DIGITIZER_BY_CODE:
            raise CorpusError(f"{where}: unknown digitizer code {digitizer_raw!r}")
        metas.append(
            BookMeta(
                book_id=book_id,
                title=title,
                author=author,
                pub_year=_parse_year(year_raw, where),
                source_library=library or None,
                digitizer=_DIGITIZER_BY_CODE[digitizer_raw],
            )
        )
        seen.add(book_id)
    return metas


@dataclass(frozen=True)
class SkipEntry:
    book_id: str
    reason: str


@dataclass(frozen=True)
class CorpusLoad:
    books: list[Book]
    skipped: list[SkipEntry]


def load_corpus(dir_path: str | Path, metadata_path: str | Path) -> CorpusLoad:
    """Load every book named in the metadata CSV from ``dir_path``.

    Missing text files are skipped and reported rather than fatal; malformed
    metadata or invalid UTF-8 raises ``CorpusError``.
    """
    dir_path = Path(dir_path)
    metas = parse_metadata(metadata_path)
    books: list[Book] = []
    skipped: list[SkipEntry] = []
    for meta in metas:
        path = dir_path / f"{meta.book_id}.txt"
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            # Only the file name: artifacts must not depend on where the
            # corpus happens to live on disk.
            skipped.append(SkipEntry(meta.book_id, f"missing file: {path.name}"))
            continue
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"book file {path} is not valid UTF-8") from exc
        text = unicodedata.normalize("NFC", text)
        books.append(Book.from_text(meta, text))
    skipped.sort(key=lambda s: s.book_id)
    return CorpusLoad(books=books, skipped=skipped)


def books_by_id(books: Iterable[Book]) -> dict[str, Book]:
    return {b.book_id: b for b in books}
