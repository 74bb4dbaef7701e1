"""
Seeded random streams for reproducible demand simulation.

One independent numpy ``Generator`` per product is spawned from the
replication seed, and draws are taken in fixed-size blocks so a run is
bit-reproducible for a given (seed, bit generator) pair.
"""
from typing import List, Optional

import numpy as np

from oio_bench.core.config import settings


def make_generator(seed: int, algorithm: Optional[str] = None) -> np.random.Generator:
    """
    Get a numpy random generator with the configured bit generator.

    Args:
        seed: Random seed
        algorithm: numpy bit generator name (defaults to settings.RNG_ALGORITHM)

    Returns:
        numpy Generator instance
    """
    bit_generator = getattr(np.random, algorithm or settings.RNG_ALGORITHM)
    return np.random.Generator(bit_generator(np.random.SeedSequence(seed)))


def replication_seed(base_seed: int, replication: int) -> int:
    """Seed of replication r is base_seed + r."""
    return base_seed + replication


class ProductStreams:
    """
    Independent per-product random streams.

    Features:
    - One spawned SeedSequence child per product
    - Block-buffered uniform and normal draws
    - Stream identity recorded (seed, algorithm) for manifests
    """

    def __init__(
        self,
        seed: int,
        n: int,
        algorithm: Optional[str] = None,
        block_size: Optional[int] = None,
    ):
        if n < 1:
            raise ValueError("Product count must be >= 1")
        self.seed = seed
        self.n = n
        self.algorithm = algorithm or settings.RNG_ALGORITHM
        self.block_size = block_size or settings.RNG_BLOCK_SIZE

        bit_generator = getattr(np.random, self.algorithm)
        children = np.random.SeedSequence(seed).spawn(n)
        self._generators: List[np.random.Generator] = [
            np.random.Generator(bit_generator(child)) for child in children
        ]

        self._uniform_block = np.empty((n, 0))
        self._uniform_pos = 0
        self._normal_block = np.empty((n, 0))
        self._normal_pos = 0

    def uniforms(self) -> np.ndarray:
        """Next uniform draw in [0, 1) from every product stream."""
        if self._uniform_pos >= self._uniform_block.shape[1]:
            self._uniform_block = np.stack(
                [gen.random(self.block_size) for gen in self._generators]
            )
            self._uniform_pos = 0
        column = self._uniform_block[:, self._uniform_pos]
        self._uniform_pos += 1
        return column

    def normals(self) -> np.ndarray:
        """Next standard normal draw from every product stream."""
        if self._normal_pos >= self._normal_block.shape[1]:
            self._normal_block = np.stack(
                [gen.standard_normal(self.block_size) for gen in self._generators]
            )
            self._normal_pos = 0
        column = self._normal_block[:, self._normal_pos]
        self._normal_pos += 1
        return column

    def poisson_at(self, indices: np.ndarray, lam: np.ndarray) -> np.ndarray:
        """Direct Poisson draws from the streams of the given products (large rates only)."""
        return np.array(
            [self._generators[i].poisson(rate) for i, rate in zip(indices, lam)],
            dtype=float,
        )

    def describe(self) -> dict:
        return {
            "seed": self.seed,
            "products": self.n,
            "algorithm": self.algorithm,
            "block_size": self.block_size,
        }
