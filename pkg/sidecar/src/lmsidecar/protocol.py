"""NDJSON protocol server: one JSON object per line, replies matched by id.

Version 1 of the wire contract:

    -> {"op": "hello", "version": 1}
    <- {"op": "hello", "version": 1, "scorer_id": "...", "ops": ["score", ...]}
    -> {"op": "score", "id": 7, "text": "..."}
    <- {"op": "score", "id": 7, "nll_per_token": 3.2, "num_tokens": 12}
    -> {"op": "detect", "id": 8, "text": "..."}
    <- {"op": "detect", "id": 8, "spans": [{"start_token": 1, "end_token": 2, "conf": 0.9}]}
    -> {"op": "correct", "id": 9, "text": "... <ocr> span </ocr> ..."}
    <- {"op": "correct", "id": 9, "replacement": "...", "score": 0.97}
    <- {"op": "error", "id": ..., "message": "..."}

The handshake advertises only the ops the backend actually serves; asking
for anything else earns an error reply on the same id.  A malformed line
never kills the server — it answers with an error and keeps reading.

Score requests are batched internally: they accumulate while more input
is already waiting and are flushed before the server would block on a
read, so a parent that writes a burst of requests and then waits always
gets its replies.  Replies to one batch keep request order, but parents
must match by id, never by position.
"""
from __future__ import annotations

import json
import select
import sys

__all__ = ["PROTOCOL_VERSION", "serve"]

PROTOCOL_VERSION = 1


def _input_ready(stream) -> bool:
    """True when a read on ``stream`` is known not to block at the fd level."""
    try:
        fd = stream.fileno()
        return bool(select.select([fd], [], [], 0)[0])
    except (OSError, ValueError, AttributeError):
        return False


def _write(fout, obj: dict) -> bool:
    try:
        fout.write(json.dumps(obj) + "\n")
        return True
    except (BrokenPipeError, ValueError):
        return False


def _error(fout, rid, message: str) -> bool:
    return _write(fout, {"op": "error", "id": rid, "message": message})


def _flush_scores(backend, pending: list, fout) -> bool:
    if not pending:
        return True
    try:
        results = backend.score_batch([text for _, text in pending])
    except Exception as exc:  # backend bug: answer rather than die
        ok = all(_error(fout, rid, f"score failed: {exc}") for rid, _ in pending)
        pending.clear()
        return ok
    ok = True
    for (rid, _), (nll, num_tokens) in zip(pending, results):
        ok = _write(fout, {
            "op": "score",
            "id": rid,
            "nll_per_token": float(nll),
            "num_tokens": int(num_tokens),
        }) and ok
    pending.clear()
    return ok


def _handle(backend, msg: dict, fout) -> bool:
    op = msg.get("op")
    rid = msg.get("id")
    if op == "hello":
        if msg.get("version") != PROTOCOL_VERSION:
            return _error(fout, rid, f"unsupported protocol version {msg.get('version')!r}")
        return _write(fout, {
            "op": "hello",
            "version": PROTOCOL_VERSION,
            "scorer_id": backend.scorer_id,
            "ops": list(backend.ops),
        })
    if op not in ("detect", "correct"):
        return _error(fout, rid, f"unknown op {op!r}")
    if op not in backend.ops:
        return _error(fout, rid, f"{op} not supported")
    text = msg.get("text")
    if not isinstance(text, str):
        return _error(fout, rid, "text must be a string")
    try:
        if op == "detect":
            return _write(fout, {"op": "detect", "id": rid, "spans": backend.detect(text)})
        replacement, score = backend.correct(text)
        return _write(fout, {
            "op": "correct", "id": rid, "replacement": replacement, "score": float(score),
        })
    except Exception as exc:
        return _error(fout, rid, f"{op} failed: {exc}")


def serve(backend, stdin=None, stdout=None, max_batch_size: int = 16) -> None:
    """Answer requests until the input stream closes or the output breaks."""
    fin = stdin if stdin is not None else sys.stdin
    fout = stdout if stdout is not None else sys.stdout
    pending: list[tuple[object, str]] = []
    while True:
        if pending and not _input_ready(fin):
            if not _flush_scores(backend, pending, fout):
                return
            fout.flush()
        line = fin.readline()
        if line == "":
            break
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
            if not isinstance(msg, dict):
                raise ValueError("not an object")
        except ValueError:
            if not _error(fout, None, "unparseable request line"):
                return
            fout.flush()
            continue
        if msg.get("op") == "score":
            text = msg.get("text")
            if not isinstance(text, str):
                if not _error(fout, msg.get("id"), "text must be a string"):
                    return
                fout.flush()
                continue
            pending.append((msg.get("id"), text))
            if len(pending) >= max_batch_size:
                if not _flush_scores(backend, pending, fout):
                    return
                fout.flush()
        else:
            # Keep "pending holds only scores": settle them before other ops.
            if not _flush_scores(backend, pending, fout):
                return
            if not _handle(backend, msg, fout):
                return
            fout.flush()
    _flush_scores(backend, pending, fout)
    try:
        fout.flush()
    except (BrokenPipeError, ValueError):
        pass
