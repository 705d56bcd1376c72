"""
Random Source - Reproducible per-trajectory uniform variate streams
"""
from typing import Optional

import numpy as np


class RandomSource:
    """
    Uniform [0, 1) stream identified by (master_seed, stream_id).

    Streams are derived with numpy's SeedSequence spawn keys, so equal
    identifiers give equal sequences and distinct stream ids give
    independent streams. Drawing n variates in one call yields the same
    numbers as n single draws.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        if master_seed < 0 or master_seed >= 2 ** 64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        if stream_id < 0:
            raise ValueError(f"stream_id must be non-negative, got {stream_id}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self._generator: Optional[np.random.Generator] = None

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
            self._generator = np.random.default_rng(seq)
        return self._generator

    def uniform(self) -> float:
        """Draw one variate"""
        return float(self.generator.random())

    def uniforms(self, size: int) -> np.ndarray:
        """Draw the next `size` variates in stream order"""
        return self.generator.random(size)

    def __repr__(self) -> str:
        return f"RandomSource(master_seed={self.master_seed}, stream_id={self.stream_id})"
