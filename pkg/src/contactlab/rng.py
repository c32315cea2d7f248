"""Counter-based random number streams.

Every stochastic object in the lab draws from a keyed splitmix64 stream:
the k-th variate of a stream is a pure function of (key, k), so streams
can be extended lazily without storing generator state, replicas with
distinct keys are independent, and a realization never depends on the
order or granularity in which it was materialized.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# stream-kind tags used when deriving keys
KIND_RECOVERY = 1
KIND_TRANSMISSION = 2
KIND_REPLICA = 3
KIND_TREE = 4
KIND_BOOTSTRAP = 5
KIND_FIXTURE = 6

_U_GOLDEN = np.uint64(_GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return x ^ (x >> 31)


def derive_key(base: int, *ids: int) -> int:
    """Derive a stream key from a base seed and a tuple of integer ids.

    Sequential absorption: each id perturbs and re-mixes the state, so
    (base, 1, 2) and (base, 12) collide no more often than chance.
    """
    h = mix64((base & _MASK) ^ _GOLDEN)
    for v in ids:
        h = mix64((h + _GOLDEN) ^ (v & _MASK))
    return h


def _mix64_vec(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _SH30)) * _MIX1
    x = (x ^ (x >> _SH27)) * _MIX2
    return x ^ (x >> _SH31)


def derive_keys(base: int, *id_arrays: np.ndarray) -> np.ndarray:
    """Vectorized derive_key over parallel id arrays (same values as the
    scalar version absorbed id by id)."""
    with np.errstate(over="ignore"):
        h = np.uint64(mix64((base & _MASK) ^ _GOLDEN))
        for ids in id_arrays:
            h = _mix64_vec((h + _U_GOLDEN) ^ np.asarray(ids).astype(np.uint64))
        return h


def derive_keys_from(bases: np.ndarray, *id_arrays: np.ndarray) -> np.ndarray:
    """Like derive_keys but over an array of base seeds (broadcasting);
    bit-identical to the scalar chain for each (base, ids...) combination."""
    with np.errstate(over="ignore"):
        h = _mix64_vec(np.asarray(bases).astype(np.uint64) ^ np.uint64(_GOLDEN))
        for ids in id_arrays:
            h = _mix64_vec((h + _U_GOLDEN) ^ np.asarray(ids).astype(np.uint64))
        return h


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Uniform(0,1) variates for an outer (key, counter) grid.

    keys and counters broadcast against each other; counter k yields the
    stream's k-th variate. Values lie strictly inside (0,1).
    """
    with np.errstate(over="ignore"):
        state = keys.astype(np.uint64) + (counters.astype(np.uint64) + np.uint64(1)) * _U_GOLDEN
        h = _mix64_vec(state)
    return ((h >> _SH11).astype(np.float64) + 0.5) * 2.0**-53


def exponential_gaps(keys: np.ndarray, counters: np.ndarray, rate: float) -> np.ndarray:
    """Exponential(rate) inter-arrival gaps by inverse CDF; strictly positive."""
    return -np.log(uniforms(keys, counters)) / rate


def np_generator(key: int) -> np.random.Generator:
    """A numpy Generator seeded from a derived key (for non-stream draws)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key & _MASK)))
