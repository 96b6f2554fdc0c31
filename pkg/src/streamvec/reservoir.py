"""Classic reservoir sampling over a stream of sketch slot indices.

The reservoir is the trainer's negative sampling distribution: a uniform
sample of the (subsampled) token stream, stored as slot indices. It is
deliberately unsmoothed, and entries are not patched on ejection, so stale
indices alias whatever word currently owns the slot.
"""

from __future__ import annotations

import numpy as np

_INITIAL_ALLOC = 1024


class Reservoir:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("reservoir capacity must be >= 1")
        self.capacity = capacity
        self.seen = 0
        self._values = np.empty(min(capacity, _INITIAL_ALLOC), dtype=np.int64)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def values(self) -> np.ndarray:
        """View of the stored entries (do not mutate)."""
        return self._values[: self._size]

    def observe(self, value: int, rng: np.random.Generator) -> bool:
        """Offer one stream item; returns True when storage changed."""
        self.seen += 1
        if self._size < self.capacity:
            if self._size == len(self._values):
                grown = np.empty(min(self.capacity, 2 * len(self._values)), dtype=np.int64)
                grown[: self._size] = self._values
                self._values = grown
            self._values[self._size] = value
            self._size += 1
            return True
        k = int(rng.integers(0, self.seen))
        if k < self.capacity:
            self._values[k] = value
            return True
        return False

    def draw(self, rng: np.random.Generator) -> int:
        """Uniform draw over stored entries, with multiplicity."""
        if self._size == 0:
            raise ValueError("cannot draw from an empty reservoir")
        return int(self._values[int(rng.integers(0, self._size))])

    # --- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        header = np.array([self.capacity, self.seen, self._size], dtype="<i8")
        return header.tobytes() + self.values.astype("<i8", copy=False).tobytes()

    @classmethod
    def from_bytes(cls, payload: bytes) -> "Reservoir":
        if len(payload) < 24:
            raise ValueError("reservoir payload truncated")
        capacity, seen, size = (int(x) for x in np.frombuffer(payload[:24], dtype="<i8"))
        values = np.frombuffer(payload[24:], dtype="<i8")
        if len(values) != size or size != min(seen, capacity):
            raise ValueError("reservoir payload inconsistent")
        res = cls(capacity)
        res.seen = seen
        res._values = values.astype(np.int64)
        res._size = size
        return res
