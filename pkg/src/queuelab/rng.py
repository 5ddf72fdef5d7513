"""Splittable random number streams.

Every simulation in this package draws from an RngStream addressed by
(seed, stream_id).  The same pair always reproduces the same sequence,
on any platform, regardless of what other streams exist.  That is what
makes replications parallelizable and runs byte-for-byte repeatable:
replication r of a run with seed s uses RngStream(s, r), no matter
which worker executes it or in which order.

Streams are backed by the counter-based Philox generator keyed through
numpy's SeedSequence, so distinct stream ids give statistically
independent streams without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RngStream:
    """A reproducible random stream identified by (seed, stream_id).

    Constructing two RngStream objects with the same seed and stream_id
    yields identical sequences (that is the cloning mechanism used for
    common-random-number experiments).  substream(j) derives a further
    independent stream deterministically, for code that needs several
    streams per replication.
    """

    seed: int
    stream_id: int
    _path: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        if self._path is None:
            self._path = (self.stream_id,)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self._path)
        self.gen = np.random.Generator(np.random.Philox(ss))

    def clone(self) -> "RngStream":
        """Fresh stream positioned at the start of the same sequence."""
        return RngStream(self.seed, self.stream_id, _path=self._path)

    def substream(self, *key: int) -> "RngStream":
        """Derive an independent stream addressed by this stream plus key."""
        if not key or any(k < 0 for k in key):
            raise ValueError("substream key must be non-negative integers")
        return RngStream(self.seed, self.stream_id, _path=self._path + key)

    def uniform(self) -> float:
        """One uniform draw on [0, 1)."""
        return float(self.gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        """n uniform draws on [0, 1)."""
        return self.gen.random(n)

    def coin(self) -> bool:
        """Fair coin; consumes exactly one uniform."""
        return bool(self.gen.random() < 0.5)

    def exponential(self, rate: float) -> float:
        """Exponential draw with the given rate; consumes one uniform."""
        return -float(np.log1p(-self.gen.random())) / rate

    def integers(self, low: int, high: int) -> int:
        """One integer uniform on {low, ..., high-1}; consumes one uniform."""
        return low + int(self.gen.random() * (high - low))

    def binomial(self, n: int, p: float) -> int:
        return int(self.gen.binomial(n, p))

    def poisson(self, lam: float) -> int:
        return int(self.gen.poisson(lam))
