import shutil
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from bookclean.align import align_pair, extract_differences
from bookclean.corpus import Book, books_by_id, load_corpus
from bookclean.lm import NgramConfig, train_ngram
from bookclean.scoring import DictionaryScorer, load_lexicon, rate_pair
from bookclean.synth import golden_metadata, make_golden_corpus

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FIXTURE_DIR = Path(__file__).parent / "data" / "corpus"


@pytest.fixture(scope="session")
def fixture_load():
    return load_corpus(FIXTURE_DIR / "books", FIXTURE_DIR / "metadata.csv")


@pytest.fixture(scope="session")
def fixture_books(fixture_load):
    return books_by_id(fixture_load.books)


@pytest.fixture
def corpus_copy(tmp_path):
    """Private copy of the fixture corpus; returns its config path."""
    dest = tmp_path / "corpus"
    shutil.copytree(FIXTURE_DIR, dest)
    return dest / "config.toml"


@pytest.fixture(scope="session")
def fixture_rated(fixture_books):
    """Rated difference records for the two fixture duplicate pairs."""
    scorer = DictionaryScorer(load_lexicon())
    rated = []
    for a_id, b_id in [("lantern-a", "lantern-b"), ("briar-a", "briar-b")]:
        a, b = fixture_books[a_id], fixture_books[b_id]
        alignment = align_pair(a, b)
        for record in extract_differences(alignment, a, b):
            rated.append(rate_pair(record, scorer))
    return rated


@pytest.fixture(scope="session")
def small_golden():
    return make_golden_corpus(n_works=8, tokens_per_work=700, seed=11)


@pytest.fixture(scope="session")
def small_golden_books(small_golden):
    metas = {m.book_id: m for m in golden_metadata(small_golden)}
    books = []
    for pair in small_golden:
        books.append(Book.from_text(metas[pair.heavy_id], pair.heavy_text()))
        books.append(Book.from_text(metas[pair.light_id], pair.light_text()))
    return books


@pytest.fixture(scope="session")
def chain_lm(small_golden_books):
    """Order-3 model with real statistics, trained on the synthetic books."""
    return train_ngram(small_golden_books, NgramConfig(order=3))
