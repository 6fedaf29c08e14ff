"""Counter-based random number generation.

Every draw in this package is a pure function of (stream key, index, slot).
That gives three properties the simulators rely on:

* the draw for index k is the same no matter which index range was requested,
  so overlapping windows of one realization agree exactly;
* replicate streams are assigned by replicate number, never by scheduling
  order, so results are independent of thread count;
* disjoint (key, index) rectangles can be generated in parallel and merged.

The generator is a splitmix64-style avalanche hash applied twice: once to
fold the index into the stream key, once to separate slots within an index.
numpy uint64 arithmetic wraps modulo 2**64, which is exactly what the mixing
function needs.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_key", "uniforms", "uniform_grid", "normals"]

# purpose tags folded into stream keys so distinct subsystems never share draws
STREAM_INNOVATIONS = 0x11
STREAM_REFERENCE = 0x22
STREAM_LIMIT = 0x33
STREAM_TAIL = 0x44
STREAM_BLOCKS = 0x55
STREAM_VERIFY = 0x66
STREAM_INEQUALITY = 0x77

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_FOLD_INIT = np.uint64(0x6A09E667F3BCC909)

_U64_MASK = (1 << 64) - 1
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_INV_2_53 = 1.0 / (1 << 53)


def _mix(z):
    """splitmix64 finalizer (Stafford mix13); full 64-bit avalanche.

    uint64 arithmetic is meant to wrap; errstate silences numpy's scalar
    overflow warning (array ops already wrap silently).
    """
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _SH30)) * _MIX1
        z = (z ^ (z >> _SH27)) * _MIX2
        return z ^ (z >> _SH31)


def _as_u64(x):
    """Two's-complement cast of python ints / int arrays to uint64."""
    if isinstance(x, np.ndarray):
        return x.astype(np.int64).astype(np.uint64) if x.dtype != np.uint64 else x
    return np.uint64(int(x) & _U64_MASK)


def derive_key(*parts):
    """Fold integers (seed, purpose tag, replicate, ...) into a stream key.

    The last part may be an integer array, in which case an array of keys is
    returned (one per element).  Deterministic and stable across platforms.
    """
    key = _FOLD_INIT
    with np.errstate(over="ignore"):
        for p in parts:
            key = _mix((_as_u64(p) + _GOLDEN) ^ key)
    return key


def uniforms(key, indices, slots):
    """Uniform (0, 1) draws, shape ``broadcast(key, indices) + (slots,)``.

    ``key`` is a uint64 scalar or array (e.g. one key per replicate) and
    ``indices`` an integer array; the two are broadcast together. The draw at
    a given (key, index, slot) never depends on the rest of the request.
    Values lie strictly inside (0, 1) so log/ndtri transforms are safe.
    """
    with np.errstate(over="ignore"):
        base = _mix(_as_u64(indices) * _GOLDEN ^ np.asarray(key, dtype=np.uint64))
        slot_inc = (np.arange(slots, dtype=np.uint64) + np.uint64(1)) * _MIX2
        bits = _mix(base[..., None] + slot_inc)
    return ((bits >> _SH11).astype(np.float64) + 0.5) * _INV_2_53


def uniform_grid(key, lo, hi, slots):
    """Uniforms for the inclusive index range [lo, hi]; shape (hi-lo+1, slots)."""
    if hi < lo:
        return np.empty((0, slots), dtype=np.float64)
    return uniforms(key, np.arange(lo, hi + 1, dtype=np.int64), slots)


def normals(key, indices, slots):
    """Standard normal draws via the exact inverse CDF; same keying as uniforms."""
    from scipy.special import ndtri

    return ndtri(uniforms(key, indices, slots))
