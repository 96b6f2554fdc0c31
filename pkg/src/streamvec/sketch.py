"""Space-saving sketch: one-pass approximate top-K word counting.

The sketch doubles as the trainer's dynamic vocabulary: embeddings and
learning rates are indexed by its slots. Counts never under-estimate a
resident word and over-estimate by at most observed/capacity. On overflow
the minimum-count slot that was least recently updated is evicted.
"""

from __future__ import annotations

from typing import IO, Iterable, NamedTuple, Optional

from streamvec._kernels import impl

HIT, FILLED, REPLACED = 0, 1, 2

_KIND_NAMES = {HIT: "hit", FILLED: "filled", REPLACED: "replaced"}


class ObserveOutcome(NamedTuple):
    """Result of one observation: which slot changed and how."""

    slot: int
    kind: int
    ejected: Optional[str] = None

    @property
    def kind_name(self) -> str:
        return _KIND_NAMES[self.kind]


class SpaceSavingSketch:
    def __init__(self, capacity: int, _core=None):
        if capacity < 1:
            raise ValueError("sketch capacity must be >= 1")
        self._core = _core if _core is not None else impl.SketchCore(capacity)

    @property
    def capacity(self) -> int:
        return self._core.capacity

    @property
    def observed(self) -> int:
        return self._core.observed

    def size(self) -> int:
        """Number of occupied slots."""
        return self._core.size()

    def observe(self, word: str) -> ObserveOutcome:
        """Apply the three-case space-saving update for one word."""
        if not word:
            raise ValueError("cannot observe an empty word")
        slot, kind, ejected = self._core.observe(word)
        return ObserveOutcome(slot=slot, kind=kind, ejected=ejected)

    def update(self, words: Iterable[str]) -> None:
        """Observe a whole token stream, discarding the per-token outcomes."""
        observe = self._core.observe
        for word in words:
            if not word:
                raise ValueError("cannot observe an empty word")
            observe(word)

    def slot_of(self, word: str) -> Optional[int]:
        slot = self._core.slot_of.get(word)
        return slot

    def count(self, word: str) -> Optional[int]:
        slot = self._core.slot_of.get(word)
        if slot is None:
            return None
        return int(self._core.counts[slot])

    def word_at(self, slot: int) -> Optional[str]:
        return self._core.items[slot]

    def count_at(self, slot: int) -> int:
        return int(self._core.counts[slot])

    def min_count(self) -> int:
        """Smallest count over occupied slots; 0 when empty."""
        return int(self._core.min_count())

    def items(self) -> list[tuple[str, int]]:
        """Occupied (word, count) pairs, count descending, ties by word."""
        rows = self._core.rows_in_order()
        return sorted(((w, int(c)) for _, w, c in rows), key=lambda it: (-it[1], it[0]))

    # --- serialization ----------------------------------------------------

    def to_tsv(self, out: IO[str]) -> None:
        """Header (capacity, observed) plus slot/word/count rows.

        Rows are written in the internal priority order so that a reload
        reproduces eviction behavior, not just the counts.
        """
        out.write(f"{self.capacity}\t{self.observed}\n")
        for slot, word, count in self._core.rows_in_order():
            out.write(f"{slot}\t{word}\t{count}\n")

    @classmethod
    def from_tsv(cls, lines: Iterable[str]) -> "SpaceSavingSketch":
        it = iter(lines)
        try:
            header = next(it)
        except StopIteration:
            raise ValueError("empty sketch serialization") from None
        try:
            capacity_s, observed_s = header.rstrip("\n").split("\t")
            capacity, observed = int(capacity_s), int(observed_s)
        except ValueError:
            raise ValueError(f"bad sketch header: {header!r}") from None
        rows = []
        for line in it:
            line = line.rstrip("\n")
            if not line:
                continue
            slot_s, word, count_s = line.split("\t")
            rows.append((int(slot_s), word, int(count_s)))
        sketch = cls(capacity)
        sketch._core.load_rows(rows, observed)
        return sketch
