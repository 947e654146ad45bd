"""Seeded random streams.

Every stochastic operation takes an explicit 64-bit seed and draws from
numpy's PCG64 bit generator. Child streams are split with `SeedSequence`
spawn keys, so a child seed depends only on the parent seed and the key
path, never on scheduling order.
"""

from __future__ import annotations

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed & SEED_MASK)))


def _key_word(key: int | str) -> int:
    if isinstance(key, int):
        return key & 0xFFFFFFFF
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], byteorder="big", signed=False)


def derive_seed(seed: int, *keys: int | str) -> int:
    """Child seed for the stream named by `keys` under `seed`."""
    sequence = np.random.SeedSequence(seed & SEED_MASK, spawn_key=tuple(_key_word(key) for key in keys))
    state = sequence.generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])
