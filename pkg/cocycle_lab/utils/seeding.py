"""
Seed derivation and counter-based uniforms
Every random quantity in the lab is a pure function of (seed, path, index), so
re-running any subset of an experiment reproduces it regardless of scheduling.
"""
import hashlib
from typing import Union

import numpy as np

MASK64 = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea & Flood). Changing them changes every result.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULTIPLIER_1 = 0xBF58476D1CE4E5B9
MIX_MULTIPLIER_2 = 0x94D049BB133111EB
# Odd constant separating the independent uniform lanes of one (seed, index)
LANE_GAMMA = 0xD1B54A32D192ED03

_U64 = np.uint64
_INV_2_53 = 1.0 / float(1 << 53)

PathComponent = Union[int, str]


def splitmix64(value: int) -> int:
    """Scalar SplitMix64 finaliser on Python ints"""
    z = (value + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX_MULTIPLIER_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MULTIPLIER_2) & MASK64
    return z ^ (z >> 31)


def splitmix64_array(values: np.ndarray) -> np.ndarray:
    """Vectorised SplitMix64 finaliser; wraps modulo 2^64 like the scalar one"""
    z = np.asarray(values, dtype=_U64)
    with np.errstate(over="ignore"):
        z = z + _U64(GOLDEN_GAMMA)
        z = (z ^ (z >> _U64(30))) * _U64(MIX_MULTIPLIER_1)
        z = (z ^ (z >> _U64(27))) * _U64(MIX_MULTIPLIER_2)
        z = z ^ (z >> _U64(31))
    return z


def _component_hash(component: PathComponent) -> int:
    if isinstance(component, bool):
        component = int(component)
    if isinstance(component, int):
        return component & MASK64
    digest = hashlib.blake2b(str(component).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master: int, *path: PathComponent) -> int:
    """Fold a path of labels and indices into a 64-bit child seed"""
    h = splitmix64(int(master) & MASK64)
    for component in path:
        h = splitmix64(h ^ _component_hash(component))
    return h


def to_uint64(index) -> np.ndarray:
    """Signed indices to their two's complement uint64 image"""
    return np.asarray(index, dtype=np.int64).astype(_U64)


def counter_bits(stream_seed, index, lane: int = 0) -> np.ndarray:
    """64 random bits keyed by (stream_seed, index, lane); broadcasts over arrays"""
    seed = np.asarray(stream_seed, dtype=_U64)
    salt = _U64((lane * LANE_GAMMA) & MASK64)
    with np.errstate(over="ignore"):
        keyed = splitmix64_array(to_uint64(index) + salt)
    return splitmix64_array(seed ^ keyed)


def counter_uniforms(stream_seed, index, lane: int = 0) -> np.ndarray:
    """Uniforms strictly inside (0, 1) built from the top 53 counter bits"""
    bits = counter_bits(stream_seed, index, lane)
    return ((bits >> _U64(11)).astype(np.float64) + 0.5) * _INV_2_53


def counter_bits_scalar(stream_seed: int, index: int, lane: int = 0) -> int:
    """Python-int twin of counter_bits for point-level code"""
    keyed = splitmix64((index + lane * LANE_GAMMA) & MASK64)
    return splitmix64((stream_seed & MASK64) ^ keyed)


def counter_uniform_scalar(stream_seed: int, index: int, lane: int = 0) -> float:
    return ((counter_bits_scalar(stream_seed, index, lane) >> 11) + 0.5) * _INV_2_53
