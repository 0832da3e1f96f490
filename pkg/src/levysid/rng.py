"""Reproducible random number streams.

Every stochastic routine in this package draws from an :class:`RngStream`,
a thin wrapper around numpy's PCG64 generator seeded through a
``SeedSequence``.  The (seed, stream_id) pair fully determines the variate
sequence; distinct stream ids give statistically independent streams, which
is how workers are decorrelated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RngStream:
    """A seeded, restartable random stream.

    Parameters
    ----------
    seed : int
        64-bit master seed.
    stream_id : int
        Sub-stream selector; streams with different ids are independent.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")
        self._gen = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        )

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, stream_id: int) -> "RngStream":
        """Derive an independent stream with the same seed."""
        return RngStream(self.seed, stream_id)
