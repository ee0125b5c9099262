"""Seedable random streams.

Each purpose (noise, projective measurement, event sampling) draws from its
own counter-based Philox stream derived from one seed, so every engine
consumes identical random numbers for the same program.
"""
from __future__ import annotations

import numpy as np

STREAMS = ("noise", "measure", "events")


def resolve_seed(seed: int | None) -> int:
    """Seeds <= 0 (or None) are replaced by operating-system entropy."""
    if seed is None or seed <= 0:
        return int(np.random.SeedSequence().entropy % (2**63 - 1)) + 1
    return int(seed)


def stream(seed: int, purpose: str) -> np.random.Generator:
    key = STREAMS.index(purpose)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(key,))))


class Rng:
    def __init__(self, seed: int | None = None):
        self.seed = resolve_seed(seed)
        self._streams = {name: stream(self.seed, name) for name in STREAMS}

    def __getitem__(self, purpose: str) -> np.random.Generator:
        return self._streams[purpose]

    def reseed(self, purpose: str, seed: int | None) -> int:
        """Restart one stream (used by GENERATE EVENTS / DEPOLARIZING CHANNEL seeds)."""
        used = resolve_seed(seed)
        self._streams[purpose] = stream(used, purpose)
        return used

    def __repr__(self):
        return f"Rng(seed={self.seed})"
