"""Sidecar configuration.

``score_model`` selects the backend: the literal name ``"starter"`` picks
the self-contained statistical model; anything else is treated as a
causal-LM name loadable by ``transformers`` (e.g. ``"gpt2"``).  The
detection and correction ops are implemented only by the starter backend,
so their model fields follow the score model when it is the starter and
resolve to ``None`` (op disabled) otherwise.  The handshake advertises
only the ops whose models are configured.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

__all__ = ["ConfigError", "SidecarConfig", "STARTER_MODEL"]

STARTER_MODEL = "starter"


class ConfigError(ValueError):
    """Invalid sidecar configuration."""


@dataclass(frozen=True)
class SidecarConfig:
    score_model: str = STARTER_MODEL
    detect_model: str | None = STARTER_MODEL
    correct_model: str | None = STARTER_MODEL
    device: str = "auto"
    max_batch_size: int = 16
    train_path: Path | None = None

    def __post_init__(self) -> None:
        if not self.score_model:
            raise ConfigError("score_model must be non-empty")
        if self.max_batch_size < 1:
            raise ConfigError("max_batch_size must be at least 1")
        if self.score_model != STARTER_MODEL:
            # Only the starter model serves these ops, so its defaults
            # follow the score model rather than advertising the unservable.
            for name in ("detect_model", "correct_model"):
                if getattr(self, name) == STARTER_MODEL:
                    object.__setattr__(self, name, None)
            if self.train_path is not None:
                raise ConfigError("train_path applies only to the starter model")
        for name, value in (("detect_model", self.detect_model),
                            ("correct_model", self.correct_model)):
            if value is not None and value != STARTER_MODEL:
                raise ConfigError(f"{name} supports only {STARTER_MODEL!r}")

    @classmethod
    def build(
        cls,
        score_model: str = STARTER_MODEL,
        *,
        detect: bool | None = None,
        correct: bool | None = None,
        device: str = "auto",
        max_batch_size: int = 16,
        train_path: Path | None = None,
    ) -> "SidecarConfig":
        """Resolve op toggles against what the chosen model can serve.

        ``detect``/``correct`` default to enabled for the starter model and
        are rejected (rather than silently dropped) when requested for a
        model that cannot serve them.
        """
        starter = score_model == STARTER_MODEL
        ops = {}
        for name, wanted in (("detect_model", detect), ("correct_model", correct)):
            if wanted is None:
                ops[name] = STARTER_MODEL if starter else None
            elif wanted and not starter:
                raise ConfigError(f"{name.split('_')[0]} is served only by the starter model")
            else:
                ops[name] = STARTER_MODEL if wanted else None
        return cls(
            score_model=score_model,
            device=device,
            max_batch_size=max_batch_size,
            train_path=train_path,
            **ops,
        )
