"""Counter-based substream seeding for reproducible parallel Monte Carlo.

Every random draw in the library comes from a generator keyed by a tuple of
non-negative integers (master seed plus structural ids such as slot, resource
block, link, trial). Identical keys give identical streams regardless of
execution order or thread count.
"""
from __future__ import annotations

import numpy as np


def substream(*key: int) -> np.random.Generator:
    """Philox generator for the given integer key tuple."""
    if not key:
        raise ValueError("substream key must not be empty")
    seq = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in key])
    return np.random.Generator(np.random.Philox(seq))
