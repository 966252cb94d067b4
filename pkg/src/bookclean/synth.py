"""Seeded generators for synthetic corpora used in tests and demos.

Three text models serve different purposes: a shared Markov chain over real
words gives the n-gram scorer structure to learn; Zipf-sampled pseudoword
streams give alignment tests realistic unique-token densities at any scale;
burst damage mimics bad scan regions for dedup thresholds.  Corruption
driven by a substitution table is the exact reverse of mining: occurrences
of a true string are replaced by the observed error character, so a mined
table can be checked against what was planted.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import accumulate
from pathlib import Path

from .analysis import SubstitutionTable
from .corpus import BookMeta, Digitizer
from .scoring import load_lexicon

__all__ = [
    "CorruptionEvent",
    "SyntheticPair",
    "burst_corrupt",
    "corrupt_generic",
    "corrupt_tokens",
    "default_substitution_table",
    "make_alignment_pair",
    "make_dedup_corpus",
    "make_golden_corpus",
    "make_markov_text",
    "word_bank",
    "write_corpus_dir",
    "zipf_tokens",
]


def word_bank() -> list[str]:
    """Bundled word list in file order (stable across runs)."""
    return sorted(load_lexicon())


def default_substitution_table() -> SubstitutionTable:
    """Planted error channel: observed char -> true string, with weights."""
    table = SubstitutionTable()
    table.add("j", ";", 80)
    table.add("j", ",", 20)
    table.add("l", "i", 100)
    table.add("c", "e", 100)
    table.add("h", "b", 100)
    table.add("n", "m", 100)
    table.add("m", "in", 100)
    return table


@dataclass(frozen=True)
class CorruptionEvent:
    token_index: int
    original: str
    corrupted: str


# Frequent function words mixed into every chain so short closed-class
# tokens (substitution sites like "in") occur at realistic rates.
_CORE_WORDS = [
    "the", "a", "i", "in", "of", "to", "and", "it", "he", "she", "was",
    "had", "his", "her", "that", "with", "for", "on", "at", "by", "not",
    "as", "but", "from", "they", "this", "all", "were", "been", "have",
]


def build_chain(rng: random.Random, vocab: list[str], branching: int = 8) -> dict[str, list[str]]:
    return {
        w: [
            rng.choice(_CORE_WORDS) if rng.random() < 0.25 else rng.choice(vocab)
            for _ in range(branching)
        ]
        for w in vocab
    }


def markov_vocab(rng: random.Random, size: int = 600) -> list[str]:
    bank = [w for w in word_bank() if w not in _CORE_WORDS]
    picked = rng.sample(bank, min(size - len(_CORE_WORDS), len(bank)))
    return _CORE_WORDS + sorted(picked)


def _sentence(rng: random.Random, chain: dict[str, list[str]], vocab: list[str]) -> list[str]:
    n_words = rng.randint(6, 18)
    cur = rng.choice(vocab)
    words = [cur.capitalize()]
    for k in range(n_words - 1):
        cur = rng.choice(chain.get(cur, vocab))
        words.append(cur)
        if k < n_words - 2:
            r = rng.random()
            if r < 0.06:
                words.append(",")
            elif r < 0.09:
                words.append(";")
    words.append(rng.choices(".!?", weights=[85, 8, 7])[0])
    return words


def make_markov_text(
    rng: random.Random, chain: dict[str, list[str]], vocab: list[str], n_tokens: int
) -> list[str]:
    """At least ``n_tokens`` tokens of sentence-shaped chain output."""
    toks: list[str] = []
    while len(toks) < n_tokens:
        toks.extend(_sentence(rng, chain, vocab))
    return toks


def corrupt_tokens(
    texts: list[str],
    table: SubstitutionTable,
    rate: float,
    rng: random.Random,
) -> tuple[list[str], list[CorruptionEvent]]:
    """Plant table-driven errors into about ``rate`` of the tokens.

    Patterns are drawn by table weight; each event rewrites one so-far
    untouched token, replacing the true string with the observed character.
    Single-character true strings are replaced inside a token; longer ones
    must match the whole token.
    """
    pats = [
        (src, rep, count)
        for src in sorted(table.counts)
        for rep, count in sorted(table.counts[src].items())
    ]
    weights = [c for _, _, c in pats]
    sites: list[list[int]] = []
    for src, rep, _ in pats:
        if len(rep) == 1:
            sites.append([i for i, t in enumerate(texts) if rep in t])
        else:
            sites.append([i for i, t in enumerate(texts) if t == rep])

    n_events = round(rate * len(texts))
    out = list(texts)
    used: set[int] = set()
    events: list[CorruptionEvent] = []
    attempts = 0
    while len(events) < n_events and attempts < n_events * 30:
        attempts += 1
        pi = rng.choices(range(len(pats)), weights=weights)[0]
        pool = [i for i in sites[pi] if i not in used]
        if not pool:
            continue
        idx = pool[rng.randrange(len(pool))]
        src, rep, _ = pats[pi]
        t = out[idx]
        if len(rep) == 1 and t != rep:
            positions = [p for p, ch in enumerate(t) if ch == rep]
            k = positions[rng.randrange(len(positions))]
            new = t[:k] + src + t[k + 1 :]
        else:
            new = src
        out[idx] = new
        used.add(idx)
        events.append(CorruptionEvent(idx, t, new))
    events.sort(key=lambda e: e.token_index)
    return out, events


def burst_corrupt(
    texts: list[str], rate: float, rng: random.Random, fill_vocab: list[str]
) -> list[str]:
    """Overwrite contiguous regions totalling about ``rate`` of the tokens.

    Scan damage clusters; replacing whole regions keeps most five-gram
    windows intact at a given token corruption rate, unlike uniform noise.
    """
    n = len(texts)
    target = round(rate * n)
    out = list(texts)
    damaged = 0
    guard = 0
    while damaged < target and guard < 10_000:
        guard += 1
        length = max(1, min(rng.randint(15, 50), target - damaged))
        start = rng.randrange(0, max(1, n - length))
        for i in range(start, start + length):
            out[i] = fill_vocab[rng.randrange(len(fill_vocab))]
        damaged += length
    return out


@dataclass(frozen=True)
class SyntheticPair:
    """A clean work plus one heavily and one lightly corrupted scan."""

    work_id: str
    clean_tokens: tuple[str, ...]
    heavy_id: str
    heavy_tokens: tuple[str, ...]
    heavy_events: tuple[CorruptionEvent, ...]
    light_id: str
    light_tokens: tuple[str, ...]
    light_events: tuple[CorruptionEvent, ...]

    def clean_text(self) -> str:
        return " ".join(self.clean_tokens)

    def heavy_text(self) -> str:
        return " ".join(self.heavy_tokens)

    def light_text(self) -> str:
        return " ".join(self.light_tokens)


def make_golden_corpus(
    n_works: int = 50,
    tokens_per_work: int = 1800,
    heavy_rate: float = 0.02,
    light_rate: float = 0.005,
    seed: int = 0,
    table: SubstitutionTable | None = None,
    vocab_size: int = 600,
) -> list[SyntheticPair]:
    """Works with a heavy and a light scan each, sharing one Markov chain."""
    rng = random.Random(seed)
    vocab = markov_vocab(rng, vocab_size)
    chain = build_chain(rng, vocab)
    table = table or default_substitution_table()
    pairs = []
    for k in range(n_works):
        toks = make_markov_text(rng, chain, vocab, tokens_per_work)
        heavy, hev = corrupt_tokens(toks, table, heavy_rate, rng)
        light, lev = corrupt_tokens(toks, table, light_rate, rng)
        wid = f"work{k:03d}"
        pairs.append(
            SyntheticPair(
                wid, tuple(toks),
                f"{wid}-h", tuple(heavy), tuple(hev),
                f"{wid}-l", tuple(light), tuple(lev),
            )
        )
    return pairs


def golden_metadata(pairs: list[SyntheticPair]) -> list[BookMeta]:
    libraries = ["nyp", "uc1", "mdp"]
    digitizers = [Digitizer.GOOGLE, Digitizer.INTERNET_ARCHIVE, Digitizer.LOCAL]
    metas = []
    for k, pair in enumerate(pairs):
        title = f"Story number {k}"
        author = f"Author {k} Surname{k}"
        for suffix, book_id in (("h", pair.heavy_id), ("l", pair.light_id)):
            metas.append(
                BookMeta(
                    book_id=book_id,
                    title=title,
                    author=author,
                    pub_year=1850 + (k % 60),
                    source_library=libraries[k % 3],
                    digitizer=digitizers[(k + (suffix == "l")) % 3],
                )
            )
    return metas


def make_dedup_corpus(seed: int = 0, tokens_per_work: int = 1500):
    """Planted duplicate clusters plus concatenation anthologies.

    Returns (books, planted_groups, planted_anthologies) where ``books`` is
    a list of (BookMeta, text).  25 works with copy counts 3/2/1 give 45
    scans; 5 anthologies concatenate work pairs 0..9, two flagged by title
    pattern and three only by the disjoint-title rule.
    """
    rng = random.Random(seed)
    vocab = markov_vocab(rng, 600)
    chain = build_chain(rng, vocab)
    bank = word_bank()
    copy_counts = [3] * 6 + [2] * 8 + [1] * 11

    works = []
    for w in range(25):
        toks = make_markov_text(rng, chain, vocab, tokens_per_work)[:tokens_per_work]
        title_words = (bank[300 + 2 * w].capitalize(), bank[301 + 2 * w])
        works.append((f"w{w:02d}", toks, " ".join(title_words)))

    # anthology a (0..4) holds works 2a and 2a+1; they share an author
    authors = {}
    for w in range(25):
        anth = w // 2 if w < 10 else None
        authors[w] = f"Anthologist {anth}" if anth is not None else f"Writer {w} Only"

    books: list[tuple[BookMeta, str]] = []
    planted_groups: list[frozenset[str]] = []
    for w, (wid, toks, title) in enumerate(works):
        copies = []
        for c in range(copy_counts[w]):
            rate = rng.uniform(0.05, 0.18)
            damaged = burst_corrupt(list(toks), rate, rng, vocab)
            book_id = f"{wid}c{c}"
            copies.append(book_id)
            books.append(
                (
                    BookMeta(book_id, title, authors[w], 1800 + w, "nyp", Digitizer.GOOGLE),
                    " ".join(damaged),
                )
            )
        planted_groups.append(frozenset(copies))

    planted_anthologies = set()
    for a in range(5):
        wa, wb = works[2 * a], works[2 * a + 1]
        if a < 2:
            title = f"The complete works of Anthologist {a}"
        else:
            # no word shared with any member title
            title = f"Miscellany {1860 + a}"
        book_id = f"anth{a}"
        planted_anthologies.add(book_id)
        books.append(
            (
                BookMeta(book_id, title, f"Anthologist {a}", 1870 + a, "uc1", Digitizer.INTERNET_ARCHIVE),
                " ".join(list(wa[1]) + list(wb[1])),
            )
        )
    return books, planted_groups, planted_anthologies


# -- alignment-scale generators --------------------------------------------

_EXT_CACHE: dict[int, list[str]] = {}


def extended_vocab(size: int) -> list[str]:
    """Pseudoword vocabulary of any size built from bank word pairs."""
    if size in _EXT_CACHE:
        return _EXT_CACHE[size]
    bank = word_bank()
    out = list(bank)
    i = 0
    while len(out) < size:
        a = bank[i % len(bank)]
        b = bank[(i * 7 + 3) % len(bank)]
        out.append(a + b)
        i += 1
    _EXT_CACHE[size] = out[:size]
    return _EXT_CACHE[size]


def zipf_tokens(rng: random.Random, n: int, vocab_size: int = 4000, s: float = 1.1) -> list[str]:
    """Zipf-distributed token stream; hapax density resembles real books."""
    vocab = extended_vocab(vocab_size)
    weights = [1.0 / (r**s) for r in range(1, vocab_size + 1)]
    cum = list(accumulate(weights))
    return rng.choices(vocab, cum_weights=cum, k=n)


def corrupt_generic(
    tokens: list[str], rate: float, rng: random.Random, vocab: list[str]
) -> list[str]:
    """Random substitutions, deletions, and insertions at ``rate``."""
    out: list[str] = []
    for t in tokens:
        if rng.random() >= rate:
            out.append(t)
            continue
        op = rng.random()
        if op < 0.6:
            out.append(vocab[rng.randrange(len(vocab))])
        elif op < 0.8:
            pass
        else:
            out.append(vocab[rng.randrange(len(vocab))])
            out.append(t)
    return out


def make_alignment_pair(
    rng: random.Random, length: int, rate: float, vocab_size: int = 4000
) -> tuple[list[str], list[str]]:
    vocab = extended_vocab(vocab_size)
    base = zipf_tokens(rng, length, vocab_size)
    return base, corrupt_generic(base, rate, rng, vocab)


# -- corpus materialization --------------------------------------------------


def write_corpus_dir(
    out_dir: str | Path,
    books: list[tuple[BookMeta, str]],
    truth: dict[str, str] | None = None,
    golden_pairs: list[tuple[str, str]] | None = None,
) -> Path:
    """Write books/, metadata.csv, and optional truth/ and golden_pairs.csv."""
    out_dir = Path(out_dir)
    (out_dir / "books").mkdir(parents=True, exist_ok=True)
    digit_code = {
        Digitizer.GOOGLE: "google",
        Digitizer.INTERNET_ARCHIVE: "ia",
        Digitizer.LOCAL: "local",
        Digitizer.UNKNOWN: "",
    }
    rows = ["book_id,title,author,pub_year,source_library,digitizer"]
    for meta, text in sorted(books, key=lambda bt: bt[0].book_id):
        (out_dir / "books" / f"{meta.book_id}.txt").write_text(text + "\n", "utf-8")
        rows.append(
            ",".join(
                [
                    meta.book_id,
                    meta.title,
                    meta.author,
                    str(meta.pub_year or ""),
                    meta.source_library or "",
                    digit_code[meta.digitizer],
                ]
            )
        )
    (out_dir / "metadata.csv").write_text("\n".join(rows) + "\n", "utf-8")
    if truth:
        (out_dir / "truth").mkdir(exist_ok=True)
        for book_id, text in sorted(truth.items()):
            (out_dir / "truth" / f"{book_id}.txt").write_text(text + "\n", "utf-8")
    if golden_pairs:
        lines = ["better_id,worse_id"] + [f"{t},{s}" for t, s in golden_pairs]
        (out_dir / "golden_pairs.csv").write_text("\n".join(lines) + "\n", "utf-8")
    return out_dir
