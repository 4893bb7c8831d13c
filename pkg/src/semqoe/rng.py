"""Named, independent random substreams derived from a single run seed."""
from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for one named consumer; streams with different names never collide."""
    tag = zlib.crc32(name.encode("ascii"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def child_seed(seed: int, *indices: int) -> int:
    """Derive an integer seed for a nested run (drop index, sweep index, ...)."""
    ss = np.random.SeedSequence([int(seed), *[int(i) for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
