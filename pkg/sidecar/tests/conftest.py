import io
import json

import pytest

from lmsidecar.config import SidecarConfig
from lmsidecar.protocol import serve
from lmsidecar.starter import StarterBackend


@pytest.fixture(scope="session")
def backend() -> StarterBackend:
    """One starter backend trained on the bundled corpus."""
    return StarterBackend.from_config(SidecarConfig())


def roundtrip(backend, requests, max_batch_size: int = 16) -> list[dict]:
    """Run the server over in-memory streams; one parsed reply per line."""
    lines = [r if isinstance(r, str) else json.dumps(r) for r in requests]
    fout = io.StringIO()
    serve(backend, stdin=io.StringIO("\n".join(lines) + "\n"), stdout=fout,
          max_batch_size=max_batch_size)
    return [json.loads(line) for line in fout.getvalue().splitlines()]
