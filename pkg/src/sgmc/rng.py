"""Counter-based random streams keyed by 64-bit integers.

All randomness in the package derives from the SplitMix64 finalizer::

    mix64(z) = z' ^ (z' >> 31),  z' = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9)
                                   then (z' ^ (z' >> 27)) * 0x94D049BB133111EB

A *key* names an independent stream; ``stream_u64(key, i)`` is the i-th
64-bit word of that stream, ``mix64(key + (i + 1) * GOLDEN)`` (the SplitMix64
sequence started at ``key``).  Keys for sub-streams are derived with
``derive(key, index)``.  Because every value is a pure function of
(key, counter), results never depend on evaluation order or thread count.

Uniforms take the top 53 bits; Gaussians use the Marsaglia polar method
on consecutive uniforms of one stream.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit

MASK64 = (1 << 64) - 1
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S63 = np.uint64(63)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


@njit
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def derive(key, index):
    """Key of sub-stream ``index`` of stream ``key``."""
    return mix64((np.uint64(key) ^ mix64(np.uint64(index) + GOLDEN)) + GOLDEN)


@njit
def stream_u64(key, counter):
    return mix64(np.uint64(key) + (np.uint64(counter) + _ONE) * GOLDEN)


@njit
def stream_bit(key, counter):
    return np.uint8(stream_u64(key, counter) >> _S63)


@njit
def stream_uniform(key, counter):
    """Uniform double in [0, 1)."""
    return float(stream_u64(key, counter) >> _S11) * _INV53


@njit
def fill_gaussian(key, counter, out):
    """Fill ``out`` with standard normals; returns the next unused counter."""
    n = out.shape[0]
    i = 0
    c = counter
    while i < n:
        u = 2.0 * stream_uniform(key, c) - 1.0
        v = 2.0 * stream_uniform(key, c + 1) - 1.0
        c += 2
        s = u * u + v * v
        if s >= 1.0 or s == 0.0:
            continue
        f = np.sqrt(-2.0 * np.log(s) / s)
        out[i] = u * f
        i += 1
        if i < n:
            out[i] = v * f
            i += 1
    return c


def key_of(*parts: int) -> int:
    """Python-level key derivation: ``derive(derive(parts[0], parts[1]), ...)``."""
    if not parts:
        raise ValueError("at least one key part required")
    k = np.uint64(int(parts[0]) & MASK64)
    for p in parts[1:]:
        k = derive(k, np.uint64(int(p) & MASK64))
    return int(k)


def gaussian(key: int, size: int, counter: int = 0) -> np.ndarray:
    out = np.empty(size, dtype=np.float64)
    fill_gaussian(np.uint64(key & MASK64), np.int64(counter), out)
    return out


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)


def stream_bits_array(keys: np.ndarray, n: int) -> np.ndarray:
    """Vectorised ``stream_bit(key, j)`` for every key and j < n -> uint8 (len(keys), n)."""
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1, 1)
    with np.errstate(over="ignore"):
        ctr = (np.arange(n, dtype=np.uint64) + _ONE) * GOLDEN
        return (_mix64_array(keys + ctr[None, :]) >> _S63).astype(np.uint8)


def derive_array(keys: np.ndarray, index) -> np.ndarray:
    """Vectorised :func:`derive` (``index`` may be an array broadcast against keys)."""
    keys = np.asarray(keys, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array((keys ^ _mix64_array(index + GOLDEN)) + GOLDEN)
