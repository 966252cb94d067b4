"""Client for external sentence scorers speaking NDJSON over stdio.

The child process is spawned once and fed one JSON object per line on
stdin; replies come back one JSON object per line on stdout and may arrive
out of order (they are matched by ``id``).  Protocol version 1:

    -> {"op": "hello", "version": 1}
    <- {"op": "hello", "version": 1, "scorer_id": "..."}
    -> {"op": "score", "id": 7, "text": "..."}
    <- {"op": "score", "id": 7, "nll_per_token": 3.2, "num_tokens": 12}
    -> {"op": "detect", "id": 8, "text": "..."}
    <- {"op": "detect", "id": 8, "spans": [{"start_token": 1, "end_token": 2, "conf": 0.9}]}
    -> {"op": "correct", "id": 9, "text": "... <ocr> span </ocr> ..."}
    <- {"op": "correct", "id": 9, "replacement": "...", "score": 0.97}

``nll_per_token`` is a mean negative log likelihood (natural log); it is
negated back into a ``SentenceScore``.
"""
from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
import time
from typing import Sequence

from .scoring import SentenceScore

__all__ = [
    "ExternalScorerClient",
    "ExternalScorerDied",
    "ExternalScorerError",
    "ExternalScorerTimeout",
    "ProtocolError",
    "PROTOCOL_VERSION",
]

PROTOCOL_VERSION = 1
DEFAULT_BATCH_TIMEOUT = 60.0


class ExternalScorerError(Exception):
    """Base class for external scorer failures."""


class ExternalScorerDied(ExternalScorerError):
    """The child process exited while requests were outstanding."""


class ProtocolError(ExternalScorerError):
    """The child wrote something that is not a valid protocol line."""


class ExternalScorerTimeout(ExternalScorerError):
    """No reply within the batch timeout."""


class ExternalScorerClient:
    """Spawns and talks to one external scorer process.

    Batches are serialized internally, so one client may be shared.  Use as
    a context manager or call ``close()`` to shut the child down.
    """

    scorer_id = "external"

    def __init__(self, cmd: str | Sequence[str], timeout: float = DEFAULT_BATCH_TIMEOUT) -> None:
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.timeout = timeout
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._queue: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        reply = self._roundtrip_hello()
        self.scorer_id = reply.get("scorer_id", "external")

    # -- plumbing ---------------------------------------------------------

    def _read_loop(self) -> None:
        try:
            for line in self._proc.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    self._queue.put(("msg", json.loads(line)))
                except json.JSONDecodeError:
                    self._queue.put(("bad", line))
        finally:
            self._queue.put(("eof", None))

    def _send(self, obj: dict) -> None:
        try:
            self._proc.stdin.write(json.dumps(obj) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ExternalScorerDied("scorer process closed its stdin") from exc

    def _next_message(self, deadline: float) -> dict:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise ExternalScorerTimeout(f"no reply within {self.timeout}s")
        try:
            kind, payload = self._queue.get(timeout=remaining)
        except queue.Empty as exc:
            raise ExternalScorerTimeout(f"no reply within {self.timeout}s") from exc
        if kind == "eof":
            raise ExternalScorerDied(
                f"scorer process exited with code {self._proc.poll()}"
            )
        if kind == "bad":
            raise ProtocolError(f"unparseable line from scorer: {payload!r}")
        return payload

    def _roundtrip_hello(self) -> dict:
        self._send({"op": "hello", "version": PROTOCOL_VERSION})
        deadline = time.monotonic() + self.timeout
        reply = self._next_message(deadline)
        if reply.get("op") != "hello" or reply.get("version") != PROTOCOL_VERSION:
            raise ProtocolError(f"bad handshake reply: {reply!r}")
        return reply

    def _request_batch(self, op: str, texts: Sequence[str]) -> list[dict]:
        """Send one request per text; collect replies matched by id."""
        with self._lock:
            ids = []
            for text in texts:
                self._next_id += 1
                ids.append(self._next_id)
                self._send({"op": op, "id": self._next_id, "text": text})
            wanted = set(ids)
            replies: dict[int, dict] = {}
            deadline = time.monotonic() + self.timeout
            while wanted:
                msg = self._next_message(deadline)
                if msg.get("op") == "error":
                    raise ProtocolError(f"scorer error: {msg.get('message', msg)!r}")
                if msg.get("op") != op or msg.get("id") not in wanted:
                    raise ProtocolError(f"unexpected reply: {msg!r}")
                replies[msg["id"]] = msg
                wanted.discard(msg["id"])
            return [replies[i] for i in ids]

    # -- operations -------------------------------------------------------

    def score_texts(self, texts: Sequence[str]) -> list[SentenceScore]:
        out = []
        for msg in self._request_batch("score", texts):
            try:
                nll = float(msg["nll_per_token"])
                num = int(msg["num_tokens"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed score reply: {msg!r}") from exc
            out.append(SentenceScore(-nll, num, self.scorer_id))
        return out

    def detect_texts(self, texts: Sequence[str]) -> list[list[dict]]:
        out = []
        for msg in self._request_batch("detect", texts):
            spans = msg.get("spans")
            if not isinstance(spans, list):
                raise ProtocolError(f"malformed detect reply: {msg!r}")
            out.append(spans)
        return out

    def correct_texts(self, texts: Sequence[str]) -> list[tuple[str, float]]:
        out = []
        for msg in self._request_batch("correct", texts):
            try:
                out.append((str(msg["replacement"]), float(msg["score"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed correct reply: {msg!r}") from exc
        return out

    def score(self, tokens) -> SentenceScore:
        """Scorer-protocol adapter: score one tokenized sentence."""
        return self.score_texts([" ".join(t.text for t in tokens)])[0]

    # -- lifecycle --------------------------------------------------------

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalScorerClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
