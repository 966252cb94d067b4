"""Configuration rules and command-line behavior."""
import subprocess
import sys

import pytest

from lmsidecar.config import ConfigError, SidecarConfig


class TestConfig:
    def test_starter_defaults_serve_all_ops(self):
        config = SidecarConfig.build()
        assert config.detect_model == "starter"
        assert config.correct_model == "starter"

    def test_neural_model_defaults_to_score_only(self):
        config = SidecarConfig.build("gpt2")
        assert config.detect_model is None
        assert config.correct_model is None

    def test_neural_detect_is_rejected_not_dropped(self):
        with pytest.raises(ConfigError, match="detect"):
            SidecarConfig.build("gpt2", detect=True)

    def test_toggles_disable_ops(self):
        config = SidecarConfig.build(detect=False)
        assert config.detect_model is None
        assert config.correct_model == "starter"

    def test_batch_size_must_be_positive(self):
        with pytest.raises(ConfigError, match="max_batch_size"):
            SidecarConfig(max_batch_size=0)

    def test_train_path_is_starter_only(self):
        with pytest.raises(ConfigError, match="train_path"):
            SidecarConfig(score_model="gpt2", train_path="corpus.txt")


class TestCommandLine:
    def test_eof_immediately_exits_cleanly(self):
        proc = subprocess.run(
            [sys.executable, "-m", "lmsidecar"],
            input="", capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0
        assert proc.stdout == ""

    def test_missing_train_file_fails_with_message(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "lmsidecar", "--train", str(tmp_path / "nope.txt")],
            input="", capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 3
        assert "lmsidecar:" in proc.stderr

    def test_tiny_train_file_is_rejected(self, tmp_path):
        small = tmp_path / "small.txt"
        small.write_text("only four words here")
        proc = subprocess.run(
            [sys.executable, "-m", "lmsidecar", "--train", str(small)],
            input="", capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 3
        assert "too small" in proc.stderr

    def test_custom_corpus_changes_scorer_id(self, tmp_path):
        corpus = tmp_path / "village.txt"
        corpus.write_text("the mill stood by the river " * 20)
        proc = subprocess.run(
            [sys.executable, "-m", "lmsidecar", "--train", str(corpus)],
            input='{"op": "hello", "version": 1}\n',
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0
        assert "village" in proc.stdout

    def test_version_flag(self):
        proc = subprocess.run(
            [sys.executable, "-m", "lmsidecar", "--version"],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0
        assert "lmsidecar" in proc.stdout
