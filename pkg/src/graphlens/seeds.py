"""Deterministic 64-bit seed derivation.

Every randomized stage derives its RNG seed from the run's master seed plus
the integers that identify the unit of work (node index, lens size, attempt
number, ...). Scheduling order and worker count therefore cannot change any
sampled result.
"""
from __future__ import annotations

import random

_MASK64 = (1 << 64) - 1


def mix64(*parts: int) -> int:
    """Fold integers into a single 64-bit seed (splitmix64 finalizer chain).

    Each part is absorbed and passed through the splitmix64 avalanche, so
    (a, b) and (b, a) yield unrelated outputs.
    """
    h = 0x9E3779B97F4A7C15
    for part in parts:
        h = (h + (part & _MASK64)) & _MASK64
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


def child_rng(*parts: int) -> random.Random:
    """RNG keyed to a work unit, e.g. child_rng(master_seed, node, lens_size)."""
    return random.Random(mix64(*parts))
