"""Counter-based deterministic random stream.

Every draw is a pure function of (seed, *indices): the 8-byte little-endian
words are fed to BLAKE2b with an 8-byte digest and the result is mapped to a
53-bit uniform.  The algorithm is pinned so corpora are bit-stable across
platforms and processes; no hidden generator state exists anywhere.
"""

from __future__ import annotations

import hashlib


def u64(seed: int, *indices: int) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed).to_bytes(8, "little", signed=False))
    for ix in indices:
        h.update(int(ix).to_bytes(8, "little", signed=True))
    return int.from_bytes(h.digest(), "little", signed=False)


def uniform01(seed: int, *indices: int) -> float:
    """Uniform in [0, 1) with 53 random bits."""
    return (u64(seed, *indices) >> 11) * 2.0**-53


def uniform(seed: int, *indices: int, low: float = 0.0, high: float = 1.0) -> float:
    return low + (high - low) * uniform01(seed, *indices)


def randint_below(seed: int, bound: int, *indices: int) -> int:
    """Integer in [0, bound) by 64-bit modular reduction (bias < 2^-40 for
    the bounds used here)."""
    return u64(seed, *indices) % bound


def shuffle_indices(count: int, seed: int) -> list[int]:
    """Deterministic Fisher-Yates permutation of range(count)."""
    idx = list(range(count))
    for i in range(count - 1, 0, -1):
        j = randint_below(seed, i + 1, 0x5348, i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx
