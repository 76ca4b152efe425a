"""Deterministic seed derivation.

All randomness in a run flows from one master seed. Sub-streams are derived
by labeled counters: ``child_seed(master, "fold", 3)`` always yields the same
value for the same path, and disjoint label paths yield independent streams.
String labels are folded in via CRC32, so streams can be bound to names
(e.g. a genome's string form) instead of worker or call order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _as_entropy(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0x7FFF_FFFF_FFFF_FFFF
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    raise TypeError(f"seed labels must be int or str, got {type(label).__name__}")


def child_seed(master: int, *labels) -> int:
    """Derive a labeled sub-seed; a pure function of (master, labels)."""
    entropy = [_as_entropy(master)] + [_as_entropy(x) for x in labels]
    return int(np.random.SeedSequence(entropy=entropy).generate_state(1, np.uint64)[0])


def spawn_rng(master: int, *labels) -> np.random.Generator:
    """Fresh generator seeded by ``child_seed(master, *labels)``."""
    return np.random.default_rng(child_seed(master, *labels))


def as_rng(rng) -> np.random.Generator:
    """Accept either an integer seed or an existing generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
