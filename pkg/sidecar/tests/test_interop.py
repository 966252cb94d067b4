"""Interoperability with the reference parent-side client.

These tests exercise the sidecar through the external-scorer client that
corpus pipelines actually use, and skip when that package is not
installed — the sidecar itself depends only on the wire protocol.
"""
import sys

import pytest

bookclean = pytest.importorskip("bookclean")

from bookclean import ExternalScorerClient  # noqa: E402  (after the skip guard)

CMD = [sys.executable, "-m", "lmsidecar"]


@pytest.fixture(scope="module")
def client():
    with ExternalScorerClient(CMD) as c:
        yield c


class TestClientInterop:
    def test_handshake_reports_model_identity(self, client):
        assert client.scorer_id == "lmsidecar/starter-bigram-v1"

    def test_scores_come_back_in_request_order(self, client):
        texts = [f"the {w} was quiet that year" for w in ("mill", "river", "market", "garden")]
        scores = client.score_texts(texts)
        assert len(scores) == len(texts)
        assert all(s.scorer_id == "lmsidecar/starter-bigram-v1" for s in scores)
        # the client negates nll_per_token into a log likelihood
        assert all(s.normalized_ll < 0 for s in scores)

    def test_damaged_reading_scores_lower(self, client):
        clean, damaged = client.score_texts(["had no doubt", "has no donbt"])
        assert clean.normalized_ll > damaged.normalized_ll

    def test_large_batch_round_trips(self, client):
        texts = [f"letter number {i} arrived in the morning" for i in range(100)]
        scores = client.score_texts(texts)
        assert len(scores) == 100
        first = client.score_texts([texts[0]])[0]
        assert first.normalized_ll == scores[0].normalized_ll

    def test_detect_spans_cover_the_garbled_run(self, client):
        (spans,) = client.detect_texts(["I kndr ft it isn't my business"])
        assert [(s["start_token"], s["end_token"]) for s in spans] == [(1, 3)]

    def test_correct_repairs_marked_span(self, client):
        ((replacement, score),) = client.correct_texts(
            ["the <ocr> wcather </ocr> turned cold that week"]
        )
        assert replacement == "weather"
        assert 0.0 < score <= 1.0
