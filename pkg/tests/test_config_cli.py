import json
import shutil
from pathlib import Path

import pytest

from bookclean.cli import main
from bookclean.config import ConfigError, PipelineConfig, load_config

MOCK_SCORER = Path(__file__).parent / "mock_scorer.py"

MINIMAL = """
[paths]
corpus_dir = "books"
metadata = "meta.csv"
out_dir = "out"
"""


def write_cfg(tmp_path, body, name="test.toml"):
    path = tmp_path / name
    path.write_text(body, "utf-8")
    return path


class TestLoadConfig:
    def test_defaults_and_path_resolution(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path, MINIMAL))
        assert cfg.corpus_dir == (tmp_path / "books").resolve()
        assert cfg.metadata == (tmp_path / "meta.csv").resolve()
        assert cfg.out_dir == (tmp_path / "out").resolve()
        assert cfg.truth_dir is None and cfg.golden_pairs is None
        assert cfg.overlap_threshold == 0.5
        assert cfg.overlap_metric == "containment_min"
        assert cfg.scorer == "dict"
        assert cfg.ngram_order == 3
        assert cfg.detection_threshold == 0.95
        assert cfg.seed == 0 and cfg.jobs == 1

    def test_section_values_land(self, tmp_path):
        body = MINIMAL + """
[dedup]
overlap_threshold = 0.7
overlap_metric = "jaccard"
anthology_patterns = ["complete works", "anthology"]

[scoring]
scorer = "ngram"
ngram_order = 4
smoothing = "kneser_ney"

[run]
seed = 11
jobs = 3
"""
        cfg = load_config(write_cfg(tmp_path, body))
        assert cfg.overlap_threshold == 0.7
        assert cfg.overlap_metric == "jaccard"
        assert cfg.anthology_patterns == ("complete works", "anthology")
        assert cfg.scorer == "ngram" and cfg.ngram_order == 4
        assert cfg.smoothing == "kneser_ney"
        assert cfg.seed == 11 and cfg.jobs == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.toml")

    def test_invalid_toml(self, tmp_path):
        with pytest.raises(ConfigError, match="not valid TOML"):
            load_config(write_cfg(tmp_path, "paths = [unclosed"))

    def test_missing_required_path(self, tmp_path):
        body = '[paths]\ncorpus_dir = "books"\nmetadata = "meta.csv"\n'
        with pytest.raises(ConfigError, match="must set out_dir"):
            load_config(write_cfg(tmp_path, body))

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match=r"unknown section \[extras\]"):
            load_config(write_cfg(tmp_path, MINIMAL + "[extras]\nx = 1\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key 'quality'"):
            load_config(write_cfg(tmp_path, MINIMAL + "[dedup]\nquality = 1\n"))

    def test_key_in_wrong_section(self, tmp_path):
        # seed is a real option, but it lives in [run], not [paths]
        body = MINIMAL + "[align]\nseed = 3\n"
        with pytest.raises(ConfigError, match=r"unknown key 'seed' in \[align\]"):
            load_config(write_cfg(tmp_path, body))

    def test_section_must_be_table(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[run\] must be a table"):
            load_config(write_cfg(tmp_path, "run = 3\n" + MINIMAL))

    @pytest.mark.parametrize(
        "patterns", ['anthology_patterns = "works"', "anthology_patterns = [1, 2]"]
    )
    def test_anthology_patterns_must_be_string_list(self, tmp_path, patterns):
        with pytest.raises(ConfigError, match="list of strings"):
            load_config(write_cfg(tmp_path, MINIMAL + f"[dedup]\n{patterns}\n"))


def make_config(**overrides):
    cfg = PipelineConfig(
        corpus_dir=Path("books"), metadata=Path("meta.csv"), out_dir=Path("out")
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


class TestValidate:
    @pytest.mark.parametrize(
        "overrides, message",
        [
            ({"overlap_metric": "cosine"}, "overlap_metric"),
            ({"overlap_threshold": 0.0}, "overlap_threshold"),
            ({"overlap_threshold": 1.5}, "overlap_threshold"),
            ({"scorer": "bert"}, "scorer"),
            ({"scorer": "external"}, "external_cmd"),
            ({"smoothing": "good_turing"}, "smoothing"),
            ({"ngram_order": 0}, "ngram_order"),
            ({"ngram_order": 6}, "ngram_order"),
            ({"clean_ratio": 1.0}, "clean_ratio"),
            ({"test_fraction": 1.1}, "test_fraction"),
            ({"working_threshold": -0.1}, "working_threshold"),
            ({"detection_threshold": 1.5}, "detection_threshold"),
            ({"correction_threshold": 2.0}, "correction_threshold"),
            ({"jobs": 0}, "jobs"),
        ],
    )
    def test_rejects_out_of_range(self, overrides, message):
        with pytest.raises(ConfigError, match=message):
            make_config(**overrides).validate()

    def test_accepts_defaults(self):
        make_config().validate()

    def test_external_with_cmd_is_valid(self):
        make_config(scorer="external", external_cmd="python3 scorer.py").validate()


def run_cli(*argv):
    return main(list(argv))


def run_stage(capsys, stage, config_path, *extra):
    code = run_cli(stage, "--config", str(config_path), *extra)
    out = capsys.readouterr().out.strip().splitlines()
    return code, (json.loads(out[-1]) if out else None)


class TestCliErrors:
    def test_no_command_is_usage_error(self, capsys):
        assert run_cli() == 1
        assert capsys.readouterr().err.startswith("bookclean:")

    def test_unknown_command(self, capsys):
        assert run_cli("frobnicate", "--config", "x.toml") == 1

    def test_missing_config_flag(self, capsys):
        assert run_cli("ingest") == 1

    def test_config_not_found(self, tmp_path, capsys):
        assert run_cli("ingest", "--config", str(tmp_path / "nope.toml")) == 1
        assert "not found" in capsys.readouterr().err

    def test_bad_scorer_choice_rejected_by_parser(self, corpus_copy, capsys):
        assert run_cli("rate", "--config", str(corpus_copy), "--scorer", "bert") == 1

    def test_override_leaving_config_invalid(self, corpus_copy, capsys):
        # external scorer without a command fails validation after overrides
        assert run_cli("rate", "--config", str(corpus_copy), "--scorer", "external") == 1
        assert "external_cmd" in capsys.readouterr().err

    def test_missing_upstream_artifact_exits_2(self, corpus_copy, capsys):
        assert run_cli("align", "--config", str(corpus_copy)) == 2
        err = capsys.readouterr().err
        assert "bookclean dedup" in err and "duplicates.jsonl" in err

    def test_missing_truth_dir_exits_2(self, corpus_copy, capsys):
        body = MINIMAL.replace('metadata = "meta.csv"', 'metadata = "metadata.csv"')
        alt = write_cfg(corpus_copy.parent, body, "alt.toml")
        assert run_cli("eval-corrections", "--config", str(alt)) == 2
        assert "truth_dir" in capsys.readouterr().err

    def test_missing_golden_pairs_exits_2(self, corpus_copy, capsys):
        body = MINIMAL.replace('metadata = "meta.csv"', 'metadata = "metadata.csv"')
        alt = write_cfg(corpus_copy.parent, body, "alt.toml")
        assert run_cli("golden-eval", "--config", str(alt)) == 2
        assert "golden_pairs" in capsys.readouterr().err

    def test_absent_golden_pairs_file_exits_2(self, corpus_copy, capsys):
        body = MINIMAL.replace('metadata = "meta.csv"', 'metadata = "metadata.csv"')
        body += 'golden_pairs = "missing.csv"\n'
        # golden_pairs belongs to [paths]; append inside the section
        alt = write_cfg(corpus_copy.parent, body, "alt.toml")
        assert run_cli("golden-eval", "--config", str(alt)) == 2
        assert "missing.csv" in capsys.readouterr().err


STAGES = [
    "ingest", "dedup", "align", "rate", "canonical", "export-training",
    "detect", "correct", "eval-corrections", "analyze", "golden-eval",
]

EXPECTED_SUMMARIES = {
    "ingest": {"books": 6, "skipped": 1},
    "dedup": {"duplicate_sets": 2, "sets": 3},
    "align": {"differences": 6, "pairs": 2, "unalignable": 0},
    "rate": {"rated": 6, "ties": 0},
    "canonical": {"sets": 3},
    "export-training": {"patterns": 5, "test": 5, "train": 7},
    "detect": {"detections": 5},
    "correct": {"applied": 2, "proposals": 5},
    "eval-corrections": {"books": 1, "corrected": 2, "introduced": 0, "missed": 3},
    "analyze": {"books": 5, "libraries": 3, "years": 5},
    "golden-eval": {"accuracy": 1.0, "pairs": 2},
}

SUBSTITUTIONS_TSV = """source\treplacement\tcount\tnorm_freq
c\te\t2\t0.333333
h\tb\t1\t0.166667
j\t;\t1\t0.166667
l\ti\t1\t0.166667
n\tu\t1\t0.166667
"""

QUALITY_LIBRARY_CSV = """source_library,digitizer,books,mean_year,mean_quality
nyp,google,2,1888.0,1.0
uc1,google,2,1889.5,0.5
mdp,internet_archive,1,1902.0,0.2
"""

QUALITY_YEAR_CSV = """pub_year,mean_quality,books
1885,1.0,1
1886,0.5,1
1891,1.0,1
1893,0.5,1
1902,0.2,1
"""

CORRECTIONS_CSV = """book_id,errors_corrected,errors_introduced,errors_missed
cricket,2,0,3
TOTAL,2,0,3
"""


def read_jsonl(path):
    with open(path, encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


class TestPipelineEndToEnd:
    def test_full_run_matches_frozen_corpus_oracles(self, corpus_copy, capsys):
        for stage in STAGES:
            code, summary = run_stage(capsys, stage, corpus_copy)
            assert code == 0, f"{stage} failed"
            assert summary == EXPECTED_SUMMARIES[stage], stage

        out = corpus_copy.parent / "out"

        # ingest: inventory counts were tallied by hand from the fixture texts
        inventory = (out / "inventory.csv").read_text("utf-8").splitlines()
        assert inventory == [
            "book_id,tokens,sentences",
            "briar-a,80,6",
            "briar-b,80,6",
            "cricket,69,5",
            "lantern-a,75,6",
            "lantern-b,75,6",
            "omnibus,119,9",
        ]
        skipped = (out / "skipped.csv").read_text("utf-8")
        assert "ghost,missing file:" in skipped and "ghost.txt" in skipped

        # dedup: two duplicate pairs, one singleton, omnibus flagged
        assert read_jsonl(out / "duplicates.jsonl") == [
            {"anthologies": [], "members": ["briar-a", "briar-b"], "set_id": "briar-a"},
            {"anthologies": [], "members": ["cricket"], "set_id": "cricket"},
            {
                "anthologies": ["omnibus"],
                "members": ["lantern-a", "lantern-b"],
                "set_id": "lantern-a",
            },
        ]

        # align: every fixture difference is a single-token substitution
        diffs = read_jsonl(out / "differences.jsonl")
        assert len(diffs) == 6
        assert all(not d["low_confidence"] for d in diffs)
        assert (out / "unalignable.jsonl").read_text("utf-8") == ""

        # rate: the clean scan wins every pair
        rated = read_jsonl(out / "rated.jsonl")
        assert [r["winner"] for r in rated] == ["a"] * 6
        assert all(not r["tie"] and r["p"] > 0.5 for r in rated)

        # canonical: posteriors match the hand-derived sentence-ratio values
        rows = {r["set_id"]: r for r in read_jsonl(out / "canonical.jsonl")}
        assert rows["cricket"]["canonical"] == "cricket"
        assert rows["cricket"]["bracket"] == []
        assert rows["briar-a"]["canonical"] == "briar-a"
        lantern = rows["lantern-a"]
        assert lantern["canonical"] == "lantern-a"
        (match,) = lantern["bracket"][0]
        assert match["winner"] == "lantern-a"
        assert match["lp_a"] == pytest.approx(-1.9438418959912545, rel=1e-12)
        assert match["lp_b"] == pytest.approx(-3.607767993709424, rel=1e-12)

        # export-training: split keeps the two duplicate components apart
        train = read_jsonl(out / "train.jsonl")
        test = read_jsonl(out / "test.jsonl")
        assert {r["book_id"].split("-")[0] for r in train} == {"briar", "truth:cricket"}
        assert {r["book_id"].split("-")[0] for r in test} == {"lantern"}
        assert sum(r["label"] == "error" for r in train + test) == 6
        assert (out / "substitutions.tsv").read_text("utf-8") == SUBSTITUTIONS_TSV

        # detect: all five planted errors in the single-copy book are flagged
        detections = read_jsonl(out / "detections.jsonl")
        assert [d["text"] for d in detections] == [
            "hetween", "cvening", "Wlnter", "donbt", "j",
        ]
        assert all(d["book_id"] == "cricket" for d in detections)
        assert all(0.7 <= d["confidence"] < 1.0 for d in detections)

        # correct: two spans repaired, the rest keep their original reading
        proposals = read_jsonl(out / "proposals.jsonl")
        assert all(p["accepted"] for p in proposals)
        changed = {
            p["original"]: p["replacement"]
            for p in proposals
            if p["replacement"] != p["original"]
        }
        assert changed == {"Wlnter": "Winter", "donbt": "doubt"}
        dirty = (corpus_copy.parent / "books" / "cricket.txt").read_text("utf-8")
        fixed = (out / "corrected" / "cricket.txt").read_text("utf-8")
        assert fixed == dirty.replace("Wlnter", "Winter").replace("donbt", "doubt")

        # eval-corrections / analyze / golden-eval reports
        assert (out / "corrections_report.csv").read_text("utf-8") == CORRECTIONS_CSV
        assert (out / "quality_by_library.csv").read_text("utf-8") == QUALITY_LIBRARY_CSV
        assert (out / "quality_by_year.csv").read_text("utf-8") == QUALITY_YEAR_CSV
        assert (out / "golden_eval.txt").read_text("utf-8") == "pairs: 2\naccuracy: 1.000000\n"

    def test_two_runs_are_byte_identical(self, corpus_copy, capsys):
        def run_all():
            for stage in STAGES:
                code, _ = run_stage(capsys, stage, corpus_copy)
                assert code == 0, stage
            out = corpus_copy.parent / "out"
            return {
                p.relative_to(out): p.read_bytes()
                for p in sorted(out.rglob("*"))
                if p.is_file()
            }

        first = run_all()
        shutil.rmtree(corpus_copy.parent / "out")
        second = run_all()
        assert first.keys() == second.keys()
        for name in first:
            assert first[name] == second[name], f"{name} differs between runs"

    def test_ngram_scorer_override(self, corpus_copy, capsys):
        for stage in ("ingest", "dedup", "align"):
            assert run_stage(capsys, stage, corpus_copy)[0] == 0
        code, summary = run_stage(capsys, "rate", corpus_copy, "--scorer", "ngram")
        assert code == 0
        assert summary["rated"] == 6
        out = corpus_copy.parent / "out"
        assert (out / "lm.pkl").exists()  # the trained model is cached
        rated = read_jsonl(out / "rated.jsonl")
        assert all(r["scorer_id"].startswith("ngram") for r in rated)

    def test_external_scorer_override(self, corpus_copy, capsys):
        for stage in ("ingest", "dedup", "align"):
            assert run_stage(capsys, stage, corpus_copy)[0] == 0
        code, summary = run_stage(
            capsys, "rate", corpus_copy,
            "--scorer", "external", "--external-cmd", f"python3 {MOCK_SCORER}",
        )
        assert code == 0
        assert summary["rated"] == 6
        rated = read_jsonl(corpus_copy.parent / "out" / "rated.jsonl")
        assert all(r["scorer_id"] == "mock-v1" for r in rated)

    def test_seed_override_changes_training_split(self, corpus_copy, capsys):
        for stage in ("ingest", "dedup", "align", "rate"):
            assert run_stage(capsys, stage, corpus_copy)[0] == 0
        out = corpus_copy.parent / "out"

        def split_for(seed):
            code, _ = run_stage(
                capsys, "export-training", corpus_copy, "--seed", str(seed)
            )
            assert code == 0
            return (
                (out / "train.jsonl").read_text("utf-8"),
                (out / "test.jsonl").read_text("utf-8"),
            )

        splits = {split_for(seed) for seed in range(6)}
        assert len(splits) > 1  # the seed really steers the component split
