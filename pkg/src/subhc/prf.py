"""Deterministic pseudorandom values keyed by integer tuples.

All randomness that must be reproducible independently of batching or worker
count is derived here: a value is a pure function of its key, never of call
order.  The mixer is splitmix64; scalar and numpy-vectorized variants share
the same bit stream.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    x = (x + _GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def key_hash(*parts: int) -> int:
    """Hash a tuple of non-negative ints to a 64-bit value."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = mix64(h ^ mix64(p & MASK64))
    return h


def uniform01(*parts: int) -> float:
    """Uniform float in [0, 1) keyed by the tuple."""
    return (key_hash(*parts) >> 11) * 2.0**-53


def derive_seed(*parts: int) -> int:
    """A 63-bit subseed (fits in signed int64) for nested generators."""
    return key_hash(*parts) >> 1


def mix64_vec(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 over a uint64 array."""
    x = (x + np.uint64(_GAMMA)).astype(np.uint64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))


def key_hash_vec(base: int, indices: np.ndarray) -> np.ndarray:
    """Vector of key_hash(base_parts..., i) values, matching the scalar path.

    ``base`` must already be the folded hash state over the leading key parts
    (use :func:`fold_base`).
    """
    idx = indices.astype(np.uint64)
    h = np.uint64(base) ^ mix64_vec(idx)
    return mix64_vec(h)


def fold_base(*parts: int) -> int:
    """Fold leading key parts into the state consumed by key_hash_vec."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = mix64(h ^ mix64(p & MASK64))
    return h


def uniform01_vec(base: int, indices: np.ndarray) -> np.ndarray:
    return (key_hash_vec(base, indices) >> np.uint64(11)) * 2.0**-53
