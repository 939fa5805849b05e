"""Seed plumbing.

Every random draw in the package flows from an :class:`RngSeed`. A seed maps
to a counter-based Philox stream keyed by ``(seed, stream_id)``, so distinct
stream ids are statistically independent and a given pair always replays the
same sequence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def stream(self, stream_id: int) -> "RngSeed":
        """Same seed, different stream."""
        return RngSeed(self.seed, stream_id)


RngLike = Union[RngSeed, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Return a generator for `rng`.

    A :class:`RngSeed` always yields a fresh generator at the start of its
    stream. An existing ``Generator`` is passed through so callers can keep
    drawing from one stream across several calls.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    raise TypeError(f"expected RngSeed or numpy Generator, got {type(rng).__name__}")
