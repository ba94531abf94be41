"""Seeded random streams with order-independent forking."""

from __future__ import annotations

import numpy as np


class Rng:
    """A deterministic stream identified by (seed, spawn path).

    ``fork(i)`` derives child ``i`` from the seed tree, so children do not
    depend on how much the parent has been consumed or on the order in which
    siblings are created.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        if seed is None:
            raise ValueError("a seed is mandatory")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(int(p) for p in path)
        self.gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.path))
        )
        self._next_child = 0

    def fork(self, index: int) -> "Rng":
        return Rng(self.seed, self.path + (index,))

    def child(self) -> "Rng":
        """Next sequential child; deterministic given the call order."""
        c = self.fork(1_000_000 + self._next_child)
        self._next_child += 1
        return c

    def bits(self, rows: int, cols: int) -> np.ndarray:
        """Uniform 0/1 matrix, unpacked from random bytes."""
        raw = self.gen.integers(0, 256, size=(rows, (cols + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, axis=1, count=cols)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, path={self.path})"
