"""Per-user seed derivation.

A user's stream depends only on (global seed, user id), so chains and rollouts
give identical results whatever the thread count or the order users run in.
"""

from __future__ import annotations

import hashlib

import numpy as np


def user_key(user_id: str) -> int:
    """Stable 64-bit key of a user id (blake2b, independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(user_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, user_id: str) -> int:
    """Mix the global seed with a user id into a 64-bit child seed.

    Mixing function: ``SeedSequence([seed, blake2b_64(user_id)]).generate_state(1, uint64)``.
    """
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, user_key(user_id)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def user_rng(seed: int, user_id: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, user_id))
