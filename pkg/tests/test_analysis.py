import pytest
from hypothesis import given
from hypothesis import strategies as st

from bookclean.analysis import (
    QualityReport,
    SubstitutionTable,
    aggregate_quality,
    char_substitutions,
    mine_substitutions,
    quality_from_pairs,
    write_quality_csv,
    write_year_csv,
)
from bookclean.corpus import Book, BookMeta, Digitizer


class TestCharSubstitutions:
    def test_single_letter_swap(self):
        assert char_substitutions("donbt", "doubt") == [("n", "u")]

    def test_multiple_swaps(self):
        assert char_substitutions("wlnter", "winter") == [("l", "i")]
        assert char_substitutions("hetween", "between") == [("h", "b")]
        assert char_substitutions("camc", "came") == [("c", "e")]

    def test_case_folded_on_observed_side_only(self):
        assert char_substitutions("Wlnter", "Winter") == [("l", "i")]
        assert char_substitutions("winter", "Winter") == [("w", "W")]

    def test_identical_strings_empty(self):
        assert char_substitutions("same", "same") == []

    def test_pure_indels_report_nothing(self):
        # a dropped letter is not a letter-for-letter substitution
        assert char_substitutions("helo", "hello") == []
        assert char_substitutions("heello", "hello") == []

    def test_non_letter_observed_ignored(self):
        # alignment of "wor;d" to "world": the ; pairs with l but is not
        # a letter, so nothing is reported
        assert char_substitutions("wor;d", "world") == []

    def test_two_substitutions(self):
        got = char_substitutions("cvening", "evening")
        assert got == [("c", "e")]
        assert char_substitutions("bcd", "bed") == [("c", "e")]

    def test_empty_strings(self):
        assert char_substitutions("", "") == []
        assert char_substitutions("abc", "") == []
        assert char_substitutions("", "abc") == []

    @given(st.text(alphabet="abcde", max_size=8), st.text(alphabet="abcde", max_size=8))
    def test_output_pairs_come_from_inputs(self, obs, true):
        for src, rep in char_substitutions(obs, true):
            assert src in obs.lower()
            assert rep in true


class TestSubstitutionTable:
    def make(self):
        t = SubstitutionTable()
        t.add("l", "i", 3)
        t.add("l", "!", 1)
        t.add("j", ";", 4)
        return t

    def test_totals_and_shares(self):
        t = self.make()
        assert t.total() == 8
        assert t.row_total("l") == 4
        assert t.row_share("l", "i") == pytest.approx(3 / 4)
        assert t.row_share("q", "x") == 0.0

    def test_top(self):
        t = self.make()
        assert t.top("l") == [("i", 3)]
        assert t.top("l", 2) == [("i", 3), ("!", 1)]
        assert t.top("missing") == []

    def test_rows_sorted_and_normalized(self):
        rows = self.make().rows()
        assert rows == [
            ("j", ";", 4, 4 / 8),
            ("l", "i", 3, 3 / 8),
            ("l", "!", 1, 1 / 8),
        ]
        assert sum(r[3] for r in rows) == pytest.approx(1.0)

    def test_patterns_ordering_and_limits(self):
        t = self.make()
        assert t.patterns() == [("j", ";"), ("l", "i"), ("l", "!")]
        assert t.patterns(max_patterns=2) == [("j", ";"), ("l", "i")]
        assert t.patterns(min_count=2) == [("j", ";"), ("l", "i")]

    def test_tsv_round_trip(self, tmp_path):
        t = self.make()
        path = tmp_path / "subs.tsv"
        t.save_tsv(path)
        back = SubstitutionTable.load_tsv(path)
        assert back.counts == t.counts
        header, *lines = path.read_text().splitlines()
        assert header == "source\treplacement\tcount\tnorm_freq"
        assert lines[0] == "j\t;\t4\t0.500000"


class TestMineSubstitutions:
    def test_fixture_table(self, fixture_rated):
        # lantern: cvening/donbt/hetween; briar: Wlnter, ';'->'j', slcpt.
        # The j gap is a single non-alphanumeric? no: 'j' is a letter, so
        # the whole winning gap ";" is recorded as its replacement.
        table = mine_substitutions(fixture_rated)
        got = {(src, rep): n for src, rep, n, _ in table.rows()}
        assert got == {
            ("c", "e"): 2,  # cvening and slcpt
            ("n", "u"): 1,  # donbt
            ("h", "b"): 1,  # hetween
            ("l", "i"): 1,  # Wlnter
            ("j", ";"): 1,  # the single-character loser rule
        }

    def test_single_char_loser_takes_whole_winning_gap(self):
        rated = rate_fixture_pair_from_texts(
            "the road l strange .",
            "the road looked strange .",
            lexicon=frozenset({"the", "road", "looked", "strange"}),
        )
        table = mine_substitutions(rated)
        assert table.counts["l"] == {"looked": 1}

    def test_ties_are_skipped(self, fixture_rated):
        forced = [
            type(rp)(rp.record, rp.score_a, rp.score_b, 0.5, 0.5, rp.winner, True)
            for rp in fixture_rated
        ]
        assert mine_substitutions(forced).total() == 0

    def test_direction_follows_winner(self):
        # same difference, rated from the dirty book's side: observed
        # character still indexes the table
        rated_ab = rate_fixture_pair_from_texts(
            "he had no doubt today .", "he had no donbt today ."
        )
        rated_ba = rate_fixture_pair_from_texts(
            "he had no donbt today .", "he had no doubt today ."
        )
        assert mine_substitutions(rated_ab).counts["n"] == {"u": 1}
        assert mine_substitutions(rated_ba).counts["n"] == {"u": 1}


def rate_fixture_pair_from_texts(text_a, text_b, lexicon=None):
    from bookclean.align import align_pair, extract_differences
    from bookclean.scoring import DictionaryScorer, load_lexicon, rate_pair

    a = Book.from_text_id("aa", text_a)
    b = Book.from_text_id("bb", text_b)
    scorer = DictionaryScorer(lexicon if lexicon is not None else load_lexicon())
    recs = extract_differences(align_pair(a, b), a, b)
    return [rate_pair(r, scorer) for r in recs]


class TestQuality:
    def test_quality_fraction(self):
        book = Book.from_text_id("x", "One here . Two there . Three gone . Four left .")
        rep = quality_from_pairs(book, [1, 3])
        assert rep == QualityReport("x", 0.5, 4, 2)

    def test_duplicate_and_out_of_range_indices(self):
        book = Book.from_text_id("x", "One here . Two there .")
        rep = quality_from_pairs(book, [0, 0, 7, -2])
        assert rep.error_sentence_count == 1
        assert rep.quality == pytest.approx(0.5)

    def test_no_sentences_rejected(self):
        book = Book.from_text_id("x", "")
        with pytest.raises(ValueError, match="no sentences"):
            quality_from_pairs(book, [])

    def test_clean_book(self):
        book = Book.from_text_id("x", "One here .")
        assert quality_from_pairs(book, []).quality == 1.0


def meta(book_id, year, lib, dig):
    return BookMeta(book_id, book_id, "A", year, lib, dig)


class TestAggregateQuality:
    def make(self):
        metas = {
            "b1": meta("b1", 1890, "nyp", Digitizer.GOOGLE),
            "b2": meta("b2", 1900, "nyp", Digitizer.GOOGLE),
            "b3": meta("b3", 1880, "uc1", Digitizer.INTERNET_ARCHIVE),
            "b4": meta("b4", None, "uc1", Digitizer.GOOGLE),
        }
        reports = [
            QualityReport("b1", 1.0, 10, 0),
            QualityReport("b2", 0.8, 10, 2),
            QualityReport("b3", 0.5, 10, 5),
            QualityReport("b4", 0.7, 10, 3),
        ]
        return reports, metas

    def test_library_rollup(self):
        lib_rows, _ = aggregate_quality(*self.make())
        assert lib_rows == [
            ("nyp", "google", 2, 1895.0, 0.9),
            ("uc1", "google", 2, 1880.0, 0.6),
        ]

    def test_year_rollup_skips_missing_years(self):
        _, year_rows = aggregate_quality(*self.make())
        assert year_rows == [(1880, 0.5, 1), (1890, 1.0, 1), (1900, 0.8, 1)]

    def test_modal_digitizer_tie_is_alphabetical(self):
        metas = {
            "b1": meta("b1", 1890, "nyp", Digitizer.GOOGLE),
            "b2": meta("b2", 1890, "nyp", Digitizer.INTERNET_ARCHIVE),
        }
        reports = [QualityReport("b1", 1.0, 5, 0), QualityReport("b2", 1.0, 5, 0)]
        lib_rows, _ = aggregate_quality(reports, metas)
        assert lib_rows[0][1] == "google"

    def test_csv_outputs(self, tmp_path):
        lib_rows, year_rows = aggregate_quality(*self.make())
        qpath, ypath = tmp_path / "q.csv", tmp_path / "y.csv"
        write_quality_csv(qpath, lib_rows)
        write_year_csv(ypath, year_rows)
        qlines = qpath.read_text().splitlines()
        assert qlines[0] == "source_library,digitizer,books,mean_year,mean_quality"
        assert qlines[1] == "nyp,google,2,1895.0,0.9"
        ylines = ypath.read_text().splitlines()
        assert ylines[0] == "pub_year,mean_quality,books"
        assert ylines[1] == "1880,0.5,1"
