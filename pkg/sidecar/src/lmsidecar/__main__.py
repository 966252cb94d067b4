"""``python -m lmsidecar`` — same as the ``lmsidecar`` script."""
from .cli import entry

if __name__ == "__main__":
    entry()
