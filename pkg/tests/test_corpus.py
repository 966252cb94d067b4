import pytest
from hypothesis import given
from hypothesis import strategies as st

from bookclean.corpus import (
    Book,
    BookMeta,
    CorpusError,
    Digitizer,
    load_corpus,
    parse_metadata,
    segment_sentences,
    tokenize,
)

from conftest import FIXTURE_DIR


def texts(s):
    return [t.text for t in tokenize(s)]


class TestTokenize:
    def test_words_and_punctuation(self):
        assert texts("The road was empty.") == ["The", "road", "was", "empty", "."]

    def test_apostrophes_stay_inside_words(self):
        assert texts("isn't Tom's") == ["isn't", "Tom's"]
        assert texts("’tis the day’s end") == ["’", "tis", "the", "day’s", "end"]

    def test_numbers_are_single_tokens(self):
        assert texts("In 1891, page 12.") == ["In", "1891", ",", "page", "12", "."]

    def test_symbols_split_individually(self):
        assert texts('he said, "go; now!"') == [
            "he", "said", ",", '"', "go", ";", "now", "!", '"',
        ]

    def test_hyphen_splits_compound(self):
        assert texts("well-known") == ["well", "-", "known"]

    def test_offsets_recover_text(self):
        s = 'She had no doubt; "none," she said.'
        for tok in tokenize(s):
            assert s[tok.char_start : tok.char_end] == tok.text

    def test_is_word_flag(self):
        toks = tokenize("word 12 ;")
        assert [t.is_word for t in toks] == [True, False, False]

    def test_empty_text(self):
        assert tokenize("") == []

    @given(st.text(max_size=200))
    def test_offsets_ordered_and_consistent(self, s):
        toks = tokenize(s)
        prev_end = 0
        for tok in toks:
            assert tok.char_start >= prev_end
            assert s[tok.char_start : tok.char_end] == tok.text
            assert tok.text.strip() == tok.text and tok.text
            prev_end = tok.char_end


class TestSegmentSentences:
    def seg(self, s):
        toks = tokenize(s)
        return [
            " ".join(t.text for t in toks[lo:hi]) for lo, hi in segment_sentences(toks)
        ]

    def test_break_on_uppercase_follower(self):
        assert self.seg("It was dark. The road bent.") == [
            "It was dark .",
            "The road bent .",
        ]

    def test_no_break_before_lowercase(self):
        assert self.seg("Mr. smith went on.") == ["Mr . smith went on ."]

    def test_break_before_opening_quote(self):
        assert self.seg('He stopped. "Wait," she said.') == [
            "He stopped .",
            '" Wait , " she said .',
        ]

    def test_question_and_exclamation(self):
        assert self.seg("Who goes? Stop! Now then.") == [
            "Who goes ?",
            "Stop !",
            "Now then .",
        ]

    def test_trailing_text_without_terminal(self):
        assert self.seg("It ended. and then") == ["It ended . and then"]

    def test_final_terminal_closes_sentence(self):
        assert self.seg("All done.") == ["All done ."]

    @given(st.text(max_size=300))
    def test_partition_covers_all_tokens(self, s):
        toks = tokenize(s)
        bounds = segment_sentences(toks)
        assert [b for pair in bounds for b in pair][1:-1:2] == [
            lo for lo, _ in bounds
        ][1:]
        if toks:
            assert bounds[0][0] == 0 and bounds[-1][1] == len(toks)
            for (_, hi), (lo, _) in zip(bounds, bounds[1:]):
                assert hi == lo
        else:
            assert bounds == []


class TestBook:
    def test_sentence_text_round_trips_tokens(self):
        book = Book.from_text_id("x", 'He said, "go home." She went.')
        for i in range(len(book.sentences)):
            rendered = book.sentence_text(i)
            lo, hi = book.sentences[i]
            assert rendered.split(" ") == [t.text for t in book.tokens[lo:hi]]

    def test_sentence_index_of(self):
        book = Book.from_text_id("x", "One here. Two there. Three gone.")
        assert book.sentences == ((0, 3), (3, 6), (6, 9))
        assert [book.sentence_index_of(i) for i in range(9)] == [0] * 3 + [1] * 3 + [2] * 3


class TestMetadata:
    def write(self, tmp_path, body):
        path = tmp_path / "meta.csv"
        path.write_text("book_id,title,author,pub_year,source_library,digitizer\n" + body)
        return path

    def test_parses_fields(self, tmp_path):
        path = self.write(tmp_path, "b1,A Title,Some One,1890,nyp,google\n")
        (meta,) = parse_metadata(path)
        assert meta == BookMeta("b1", "A Title", "Some One", 1890, "nyp", Digitizer.GOOGLE)

    def test_optional_fields_empty(self, tmp_path):
        path = self.write(tmp_path, "b1,A Title,,,,\n")
        (meta,) = parse_metadata(path)
        assert meta.author == ""
        assert meta.pub_year is None
        assert meta.source_library is None
        assert meta.digitizer is Digitizer.UNKNOWN

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "meta.csv"
        path.write_text("id,title\nb1,x\n")
        with pytest.raises(CorpusError, match="header"):
            parse_metadata(path)

    def test_rejects_duplicate_id(self, tmp_path):
        path = self.write(tmp_path, "b1,T,,,,\nb1,T2,,,,\n")
        with pytest.raises(CorpusError, match="duplicate book_id"):
            parse_metadata(path)

    def test_rejects_bad_year(self, tmp_path):
        with pytest.raises(CorpusError, match="not an integer"):
            parse_metadata(self.write(tmp_path, "b1,T,,around 1890,,\n"))
        with pytest.raises(CorpusError, match="plausible range"):
            parse_metadata(self.write(tmp_path, "b1,T,,190,,\n"))

    def test_rejects_unknown_digitizer(self, tmp_path):
        with pytest.raises(CorpusError, match="digitizer"):
            parse_metadata(self.write(tmp_path, "b1,T,,,,microfilm\n"))

    def test_rejects_empty_title(self, tmp_path):
        with pytest.raises(CorpusError, match="empty title"):
            parse_metadata(self.write(tmp_path, "b1,,,,,\n"))

    def test_error_names_file_and_line(self, tmp_path):
        path = self.write(tmp_path, "b1,T,,,,\nb2,T,,bad,,\n")
        with pytest.raises(CorpusError, match=r"meta\.csv:3"):
            parse_metadata(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorpusError, match="not found"):
            parse_metadata(tmp_path / "nope.csv")


class TestLoadCorpus:
    # token and sentence counts below were tallied by hand from the fixture
    # texts; they pin the tokenizer and segmenter end to end
    HAND_COUNTS = {
        "lantern-a": (75, 6),
        "lantern-b": (75, 6),
        "briar-a": (80, 6),
        "briar-b": (80, 6),
        "omnibus": (119, 9),
        "cricket": (69, 5),
    }

    def test_fixture_token_and_sentence_counts(self, fixture_load):
        got = {
            b.book_id: (len(b.tokens), len(b.sentences)) for b in fixture_load.books
        }
        assert got == self.HAND_COUNTS

    def test_missing_file_is_skipped_with_reason(self, fixture_load):
        assert [s.book_id for s in fixture_load.skipped] == ["ghost"]
        assert "missing file" in fixture_load.skipped[0].reason
        assert "ghost.txt" in fixture_load.skipped[0].reason

    def test_text_is_nfc_normalized(self, tmp_path):
        (tmp_path / "b1.txt").write_text("café day.", "utf-8")
        meta = tmp_path / "meta.csv"
        meta.write_text(
            "book_id,title,author,pub_year,source_library,digitizer\nb1,T,,,,\n"
        )
        load = load_corpus(tmp_path, meta)
        assert load.books[0].tokens[0].text == "café"

    def test_invalid_utf8_raises(self, tmp_path):
        (tmp_path / "b1.txt").write_bytes(b"\xff\xfe bad")
        meta = tmp_path / "meta.csv"
        meta.write_text(
            "book_id,title,author,pub_year,source_library,digitizer\nb1,T,,,,\n"
        )
        with pytest.raises(CorpusError, match="UTF-8"):
            load_corpus(tmp_path, meta)

    def test_fixture_dir_exists(self):
        assert (FIXTURE_DIR / "metadata.csv").exists()
