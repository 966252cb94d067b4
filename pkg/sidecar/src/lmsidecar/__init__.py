"""Language-model scoring sidecar speaking the NDJSON scorer protocol.

The package serves ``hello``/``score`` (and, with the built-in statistical
model, ``detect``/``correct``) over stdio so a corpus pipeline can spawn
it as an external scorer.  See ``lmsidecar --help`` for the knobs.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .config import ConfigError, SidecarConfig
from .protocol import PROTOCOL_VERSION, serve
from .starter import StarterBackend, StarterModel
from .transformer import BackendUnavailable, TransformerBackend

__all__ = [
    "BackendUnavailable",
    "ConfigError",
    "PROTOCOL_VERSION",
    "SidecarConfig",
    "StarterBackend",
    "StarterModel",
    "TransformerBackend",
    "serve",
    "__version__",
]
