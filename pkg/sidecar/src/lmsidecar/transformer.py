"""Causal-transformer scoring backend (optional).

Loads a pretrained causal language model through ``transformers`` and
scores texts as the mean negative log likelihood of their subword tokens.
The first token of a sequence has no conditional probability under a
causal model, so it is excluded from the mean and ``num_tokens`` reports
the count of scored subwords; a one-subword text scores 0.0 by
convention.  Scores are therefore comparison-only, never calibrated
probabilities.

Each distinct text is scored as its own unpadded sequence in evaluation
mode and memoized, so identical text yields bit-identical results within
a process regardless of how requests were batched.  Detection and
correction models are not implemented by this backend; the handshake
never advertises those ops for it.
"""
from __future__ import annotations

from .config import SidecarConfig

__all__ = ["BackendUnavailable", "TransformerBackend"]


class BackendUnavailable(RuntimeError):
    """The neural stack or the requested model weights cannot be loaded."""


class TransformerBackend:
    ops = ("score",)

    def __init__(self, model_name: str, device: str = "auto") -> None:
        try:
            import torch
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:
            raise BackendUnavailable(
                f"neural extras not installed (pip install lmsidecar[neural]): {exc}"
            ) from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_name)
            model = AutoModelForCausalLM.from_pretrained(model_name)
        except Exception as exc:
            raise BackendUnavailable(f"cannot load model {model_name!r}: {exc}") from exc
        if device == "auto":
            device = "cuda" if torch.cuda.is_available() else "cpu"
        self._torch = torch
        self._device = device
        self._model = model.to(device).eval()
        self._cache: dict[str, tuple[float, int]] = {}
        self.scorer_id = f"lmsidecar/{model_name}"

    @classmethod
    def from_config(cls, config: SidecarConfig) -> "TransformerBackend":
        return cls(config.score_model, device=config.device)

    def score_batch(self, texts: list[str]) -> list[tuple[float, int]]:
        return [self._score_one(text) for text in texts]

    def _score_one(self, text: str) -> tuple[float, int]:
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        ids = self._tokenizer(text, return_tensors="pt").input_ids.to(self._device)
        length = ids.shape[1]
        if length < 2:
            result = (0.0, length)
        else:
            with self._torch.no_grad():
                logits = self._model(ids).logits
            logprobs = self._torch.log_softmax(logits[:, :-1, :].float(), dim=-1)
            picked = logprobs.gather(2, ids[:, 1:].unsqueeze(-1)).squeeze(-1)
            result = (-picked.mean().item(), length - 1)
        self._cache[text] = result
        return result
