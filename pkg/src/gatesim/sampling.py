"""Basis-state sampling by descent through a pairwise probability tree.

The tree over the ``2^N`` probabilities is the one induced by summing
adjacent pairs level by level.  Only the levels above a block of leaves are
kept in memory; the levels inside a block are rebuilt when a draw lands in
it.  Because every node is a pairwise sum of its two children, the sampled
indices depend only on the probabilities and the uniforms, never on how the
state is split into blocks or ranks.
"""
from __future__ import annotations

from typing import Callable

import numpy as np


def _levels(leaves: np.ndarray) -> list[np.ndarray]:
    levels = [np.asarray(leaves, dtype=np.float64)]
    while levels[-1].size > 1:
        lv = levels[-1]
        levels.append(lv[0::2] + lv[1::2])
    return levels


def _descend(levels: list[np.ndarray], u: float) -> tuple[int, float]:
    node = 0
    for lv in reversed(levels[:-1]):
        left = 2 * node
        m_left, m_right = lv[left], lv[left + 1]
        if (u < m_left or m_right <= 0.0) and m_left > 0.0:
            node = left
        else:
            u -= m_left
            node = left + 1
    return node, u


def tree_sample(block_masses: np.ndarray, block_probs: Callable[[int], np.ndarray],
                uniforms: np.ndarray) -> np.ndarray:
    """Map uniforms in [0, 1) to basis indices.

    ``block_masses[b]`` must equal the pairwise sum of ``block_probs(b)``;
    both sizes are powers of two.
    """
    upper = _levels(block_masses)
    total = upper[-1][0]
    if not total > 0.0:
        raise ValueError("cannot sample from a state of zero norm")
    placed = []
    for u in uniforms:
        b, rest = _descend(upper, float(u) * total)
        placed.append((b, rest))
    out = np.empty(len(placed), dtype=np.int64)
    cache: dict[int, list[np.ndarray]] = {}
    for k, (b, rest) in enumerate(placed):
        if b not in cache:
            cache[b] = _levels(block_probs(b))
        inner = cache[b]
        leaf, _ = _descend(inner, rest)
        out[k] = b * inner[0].size + leaf
    return out
