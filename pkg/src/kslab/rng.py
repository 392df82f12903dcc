"""Counter-based random streams with explicit keys.

Every stochastic operation in the package derives its randomness from a
Philox counter-based generator whose 128-bit key is a deterministic function
of the caller-supplied integer seed plus context parts (a short tag, the
sample size, the replicate index, ...).  Streams for distinct replicates are
independent by key separation, so results never depend on chunking, worker
count, or evaluation order.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox, SeedSequence


def _as_entropy(part) -> int:
    if isinstance(part, str):
        return int.from_bytes(part.encode("utf-8"), "little")
    if isinstance(part, (int, np.integer)):
        return int(part) & ((1 << 128) - 1)
    raise TypeError(f"seed part must be int or str, got {type(part)!r}")


def stream_key(*parts) -> int:
    """Derive a 128-bit Philox key from a tuple of ints/short strings."""
    state = SeedSequence([_as_entropy(p) for p in parts]).generate_state(2, np.uint64)
    return (int(state[0]) << 64) | int(state[1])


def stream(*parts) -> Generator:
    """A fresh Generator whose Philox key is derived from ``parts``."""
    return Generator(Philox(key=stream_key(*parts)))


def replicate_stream(base_key: int, index: int) -> Generator:
    """Generator for replicate ``index`` under a precomputed 128-bit base key.

    The replicate index is mixed into the low key word, so consecutive
    replicates use disjoint Philox streams regardless of how work is split
    across chunks or workers.
    """
    return Generator(Philox(key=(base_key ^ index) & ((1 << 128) - 1)))
