"""TOML-backed pipeline configuration.

One flat dataclass holds every knob; the file groups them into sections
([paths], [dedup], [align], [scoring], [singlecopy], [run]) purely for
readability.  Relative paths are resolved against the config file's
directory so a corpus checkout is relocatable.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dedup import DEFAULT_ANTHOLOGY_PATTERNS

__all__ = ["ConfigError", "PipelineConfig", "load_config"]

_PATH_FIELDS = {"corpus_dir", "metadata", "out_dir", "truth_dir", "golden_pairs", "lexicon"}

_SECTIONS = {
    "paths": ["corpus_dir", "metadata", "out_dir", "truth_dir", "golden_pairs", "lexicon"],
    "dedup": ["overlap_threshold", "overlap_metric", "anthology_patterns"],
    "align": ["max_segment_tokens", "context_tokens"],
    "scoring": [
        "scorer",
        "ngram_order",
        "ngram_alpha",
        "ngram_min_count",
        "smoothing",
        "external_cmd",
        "external_timeout",
    ],
    "singlecopy": [
        "clean_ratio",
        "test_fraction",
        "working_threshold",
        "detection_threshold",
        "correction_threshold",
        "max_edit_distance",
        "beam_width",
        "top_k",
        "max_patterns",
    ],
    "run": ["seed", "jobs"],
}


class ConfigError(ValueError):
    """Raised for unreadable, unknown, or out-of-range configuration."""


@dataclass
class PipelineConfig:
    corpus_dir: Path
    metadata: Path
    out_dir: Path
    truth_dir: Path | None = None
    golden_pairs: Path | None = None
    lexicon: Path | None = None

    overlap_threshold: float = 0.5
    overlap_metric: str = "containment_min"
    anthology_patterns: tuple[str, ...] = DEFAULT_ANTHOLOGY_PATTERNS

    max_segment_tokens: int = 5000
    context_tokens: int = 3

    scorer: str = "dict"
    ngram_order: int = 3
    ngram_alpha: float = 0.1
    ngram_min_count: int = 2
    smoothing: str = "add_alpha"
    external_cmd: str | None = None
    external_timeout: float = 60.0

    clean_ratio: float = 0.5
    test_fraction: float = 0.2
    working_threshold: float = 0.5
    detection_threshold: float = 0.95
    correction_threshold: float = 0.95
    max_edit_distance: int = 3
    beam_width: int = 200
    top_k: int = 50
    max_patterns: int = 100

    seed: int = 0
    jobs: int = 1

    def validate(self) -> None:
        if self.overlap_metric not in ("containment_min", "jaccard"):
            raise ConfigError(f"unknown overlap_metric {self.overlap_metric!r}")
        if not 0.0 < self.overlap_threshold <= 1.0:
            raise ConfigError("overlap_threshold must be in (0, 1]")
        if self.scorer not in ("dict", "ngram", "external"):
            raise ConfigError(f"unknown scorer {self.scorer!r}")
        if self.scorer == "external" and not self.external_cmd:
            raise ConfigError("scorer 'external' requires external_cmd")
        if self.smoothing not in ("add_alpha", "kneser_ney"):
            raise ConfigError(f"unknown smoothing {self.smoothing!r}")
        if not 1 <= self.ngram_order <= 5:
            raise ConfigError("ngram_order must be between 1 and 5")
        if not 0.0 <= self.clean_ratio < 1.0:
            raise ConfigError("clean_ratio must be in [0, 1)")
        if not 0.0 <= self.test_fraction <= 1.0:
            raise ConfigError("test_fraction must be in [0, 1]")
        for name in ("working_threshold", "detection_threshold", "correction_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc

    known = {f.name for f in fields(PipelineConfig)}
    flat: dict[str, object] = {}
    for section, table in raw.items():
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        if not isinstance(table, dict):
            raise ConfigError(f"{path}: [{section}] must be a table")
        for key, value in table.items():
            if key not in _SECTIONS[section] or key not in known:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            flat[key] = value

    for name in ("corpus_dir", "metadata", "out_dir"):
        if name not in flat:
            raise ConfigError(f"{path}: [paths] must set {name}")

    base = path.resolve().parent
    for name in _PATH_FIELDS & flat.keys():
        flat[name] = (base / str(flat[name])).resolve()
    if "anthology_patterns" in flat:
        pats = flat["anthology_patterns"]
        if not isinstance(pats, list) or not all(isinstance(p, str) for p in pats):
            raise ConfigError(f"{path}: anthology_patterns must be a list of strings")
        flat["anthology_patterns"] = tuple(pats)

    try:
        config = PipelineConfig(**flat)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    config.validate()
    return config
