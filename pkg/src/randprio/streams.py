"""Counter-based random streams keyed by tuples of integers.

Every stochastic quantity in the package is drawn from a SplitMix64 stream
whose 64-bit key is derived from ``(seed, part, part, ...)``.  Streams are
independent of evaluation order, so cells of an instance or samples of a
Monte Carlo run can be produced in any order (or concurrently) and still
reproduce bit-for-bit.

The same mixing function exists twice: as plain Python integer arithmetic
(for deriving scalar keys) and as numba kernels (for bulk draws).  The test
suite checks that the two agree.
"""
from __future__ import annotations

import hashlib

import numpy as np
from numba import njit, uint64

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def _tag(name: str) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "little")


TAG_PRESET = _tag("preset")
TAG_TRIAL = _tag("trial")
TAG_RP = _tag("rp")
TAG_ADVERSARIAL = _tag("adversarial")
TAG_BERRY_ESSEEN = _tag("berry-esseen")


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive(key: int, part: int) -> int:
    return mix64(mix64(key) ^ ((part * GOLDEN + 0x632BE59BD9B4E019) & MASK64))


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream_key(seed: int, *parts: int | str) -> int:
    """Key of the stream addressed by ``(seed, *parts)``.

    String parts are hashed to fixed 64-bit tags (not Python's salted hash).
    """
    key = mix64(check_seed(seed) ^ 0x5851F42D4C957F2D)
    for p in parts:
        key = derive(key, _tag(p) if isinstance(p, str) else int(p) & MASK64)
    return key


def word(key: int, k: int) -> int:
    """The k-th 64-bit output of the SplitMix64 stream with state ``key``."""
    return mix64(key + (k + 1) * GOLDEN)


def uniform(key: int, k: int) -> float:
    return (word(key, k) >> 11) * _INV53


# --- numba kernels ---------------------------------------------------------


@njit(cache=True, nogil=True)
def _mix64_nb(z):
    z = (z ^ (z >> uint64(30))) * uint64(_M1)
    z = (z ^ (z >> uint64(27))) * uint64(_M2)
    return z ^ (z >> uint64(31))


@njit(cache=True, nogil=True)
def _derive_nb(key, part):
    return _mix64_nb(_mix64_nb(key) ^ (part * uint64(GOLDEN) + uint64(0x632BE59BD9B4E019)))


@njit(cache=True, nogil=True)
def _uniform_nb(key, k):
    w = _mix64_nb(key + (uint64(k) + uint64(1)) * uint64(GOLDEN))
    return float(w >> uint64(11)) * _INV53


@njit(cache=True)
def _grid_keys(base, n):
    out = np.empty((n, n), dtype=np.uint64)
    for i in range(n):
        row = _derive_nb(base, uint64(i))
        for j in range(n):
            out[i, j] = _derive_nb(row, uint64(j))
    return out


@njit(cache=True)
def _indexed_keys(base, start, count):
    out = np.empty(count, dtype=np.uint64)
    for s in range(count):
        out[s] = _derive_nb(base, uint64(start + s))
    return out


@njit(cache=True)
def _uniforms_nb(keys, k):
    out = np.empty(keys.shape[0], dtype=np.float64)
    for s in range(keys.shape[0]):
        out[s] = _uniform_nb(keys[s], k)
    return out


def grid_keys(key: int, n: int) -> np.ndarray:
    """Stream keys for cells ``(i, j)``: ``derive(derive(key, i), j)``."""
    return _grid_keys(np.uint64(key), n)


def indexed_keys(key: int, start: int, count: int) -> np.ndarray:
    """Stream keys ``derive(key, start + s)`` for ``s < count``."""
    return _indexed_keys(np.uint64(key), start, count)


def uniforms(keys: np.ndarray, k: int) -> np.ndarray:
    """The k-th uniform in [0, 1) of each stream in ``keys``."""
    keys = np.ascontiguousarray(keys, dtype=np.uint64).ravel()
    return _uniforms_nb(keys, k)
