"""Seeded random streams.

Every random draw in the package goes through a ``numpy.random.Generator``
obtained from :func:`stream`. A stream is identified by a master seed plus a
key of (realization index, purpose tag); the same key always yields the same
draws, regardless of how work is scheduled across processes.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

_MASK63 = (1 << 63) - 1


def purpose_id(tag: str) -> int:
    """Stable 32-bit integer for a purpose tag."""
    return zlib.crc32(tag.encode("utf-8"))


def derive_seed(master: int, *keys: int | str) -> int:
    """Derive a 63-bit child seed from ``master`` and an integer/str key path."""
    key = tuple(purpose_id(k) if isinstance(k, str) else int(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(master) & ((1 << 64) - 1), spawn_key=key)
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return ((int(hi) << 32) | int(lo)) & _MASK63


@dataclass(frozen=True)
class RngStream:
    seed: int
    realization: int = 0
    purpose: str = "main"

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(derive_seed(self.seed, self.realization, self.purpose))

    def child(self, purpose: str) -> "RngStream":
        return RngStream(derive_seed(self.seed, self.realization, self.purpose), 0, purpose)


def stream(seed: int, realization: int = 0, purpose: str = "main") -> np.random.Generator:
    return RngStream(seed, realization, purpose).generator()


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an RngStream, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def numba_seed(rng: np.random.Generator) -> int:
    """Draw a seed for numba's internal generator from a numpy Generator."""
    return int(rng.integers(0, 2**31 - 1))
