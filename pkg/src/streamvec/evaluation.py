"""Intrinsic evaluation: sketch count-error reports, cross-model cosine
similarity correlation over frequency-rank buckets, and nearest neighbors.

Reports are emitted as CSV so the figures can be reproduced with any
plotting tool. Similarities use target vectors only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence

import numpy as np

from streamvec.batch import BatchVocab
from streamvec.corpus import CountTable, rank_by_frequency
from streamvec.sgns import EmbeddingTable, cosine
from streamvec.sketch import SpaceSavingSketch

_ENUMERATION_LIMIT = 4_000_000


class EmbeddingView:
    """Immutable word -> vector snapshot with a frequency-rank word order."""

    def __init__(self, words: Sequence[str], matrix: np.ndarray):
        if len(words) != matrix.shape[0]:
            raise ValueError("word list and matrix row count differ")
        self.words = list(words)
        self.matrix = np.array(matrix, dtype=np.float32)
        self._index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def vector(self, word: str) -> Optional[np.ndarray]:
        i = self._index.get(word)
        return None if i is None else self.matrix[i]

    @classmethod
    def from_stream_model(cls, model) -> "EmbeddingView":
        """Snapshot of the resident words' target vectors, rank-ordered."""
        sketch: SpaceSavingSketch = model.sketch
        words = [w for w, _ in sketch.items()]
        rows = np.empty((len(words), model.table.dim), dtype=np.float32)
        for i, w in enumerate(words):
            rows[i] = model.table.target[sketch.slot_of(w)]
        return cls(words, rows)

    @classmethod
    def from_batch(cls, vocab: BatchVocab, table: EmbeddingTable) -> "EmbeddingView":
        return cls(vocab.words, table.target.copy())


@dataclass
class CountErrorRow:
    rank: int
    word: str
    true_count: int
    estimate: Optional[int]
    relative_error: Optional[float]


@dataclass
class CountErrorReport:
    mode: str
    rows: list[CountErrorRow]

    def write_csv(self, out: IO[str]) -> None:
        out.write("rank,word,true_count,estimated_count,relative_error\n")
        for r in self.rows:
            est = "" if r.estimate is None else str(r.estimate)
            err = "" if r.relative_error is None else repr(r.relative_error)
            out.write(f"{r.rank},{r.word},{r.true_count},{est},{err}\n")


def count_error_report(
    sketch: SpaceSavingSketch, truth: CountTable, mode: str = "impute"
) -> CountErrorReport:
    """Relative count error per true-rank word.

    In impute mode non-resident words are assigned the sketch's minimum
    counter; in omit mode their estimate and error stay undefined.
    """
    if mode not in ("impute", "omit"):
        raise ValueError(f"unknown mode {mode!r}")
    if not truth.entries:
        raise ValueError("ground-truth table is empty")
    floor = sketch.min_count()
    rows = []
    for rank, (word, true_count) in enumerate(rank_by_frequency(truth), start=1):
        estimate = sketch.count(word)
        if estimate is None and mode == "impute":
            estimate = floor
        error = None if estimate is None else (estimate - true_count) / true_count
        rows.append(CountErrorRow(rank, word, true_count, estimate, error))
    return CountErrorReport(mode=mode, rows=rows)


def _interval_indices(interval: tuple[int, int], size: int) -> range:
    lo, hi = interval
    if not (1 <= lo <= hi <= size):
        raise ValueError(f"rank interval {interval} invalid for {size} ranked words")
    return range(lo - 1, hi)


def sample_bucket_pairs(
    ranked_words: Sequence[str],
    interval_a: tuple[int, int],
    interval_b: tuple[int, int],
    n_pairs: int,
    rng: np.random.Generator,
) -> list[tuple[str, str]]:
    """Uniform sample of unordered distinct word pairs across two rank buckets.

    Intervals are 1-based inclusive ranks. If the buckets contain at most
    n_pairs unique pairs, all of them are returned.
    """
    ia = _interval_indices(interval_a, len(ranked_words))
    ib = _interval_indices(interval_b, len(ranked_words))
    overlap = max(0, min(ia.stop, ib.stop) - max(ia.start, ib.start))
    universe = len(ia) * len(ib) - overlap - overlap * (overlap - 1) // 2
    if universe <= max(n_pairs, _ENUMERATION_LIMIT):
        seen = set()
        pairs = []
        for i in ia:
            for j in ib:
                if i == j:
                    continue
                key = (i, j) if i < j else (j, i)
                if key not in seen:
                    seen.add(key)
                    pairs.append(key)
        if universe <= n_pairs:
            chosen = pairs
        else:
            picks = rng.choice(len(pairs), size=n_pairs, replace=False)
            chosen = [pairs[k] for k in picks]
    else:
        # rejection sampling; pairs drawable from both ends are kept with
        # probability 1/2 so every unordered pair is equally likely
        seen = set()
        chosen = []
        while len(chosen) < n_pairs:
            i = ia.start + int(rng.integers(0, len(ia)))
            j = ib.start + int(rng.integers(0, len(ib)))
            if i == j:
                continue
            if i in ib and j in ia and rng.random() >= 0.5:
                continue
            key = (i, j) if i < j else (j, i)
            if key not in seen:
                seen.add(key)
                chosen.append(key)
    return [(ranked_words[i], ranked_words[j]) for i, j in chosen]


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Sample Pearson r; None for fewer than two points or zero variance."""
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    n = len(xs)
    if n < 2:
        return None
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        return None
    return float(dx @ dy) / math.sqrt(sx * sy)


@dataclass
class SimilarityReport:
    bucket_pair: tuple[tuple[int, int], tuple[int, int]]
    pairs_sampled: int
    defined_pairs: int
    undefined_fraction: float
    pearson_r: Optional[float]
    points: list[tuple[str, str, float, float]] = field(default_factory=list)

    def write_csv(self, out: IO[str]) -> None:
        r = "nan" if self.pearson_r is None else repr(self.pearson_r)
        out.write(
            f"# buckets={self.bucket_pair[0]}x{self.bucket_pair[1]}"
            f" pearson_r={r} undefined_fraction={self.undefined_fraction!r}"
            f" pairs={self.pairs_sampled} defined={self.defined_pairs}\n"
        )
        out.write("word_a,word_b,similarity_a,similarity_b\n")
        for wa, wb, sa, sb in self.points:
            out.write(f"{wa},{wb},{sa!r},{sb!r}\n")


def similarity_correlation(
    view_a: EmbeddingView,
    view_b: EmbeddingView,
    pairs: Sequence[tuple[str, str]],
    bucket_pair=((0, 0), (0, 0)),
) -> SimilarityReport:
    """Cosine similarities of word pairs under two models, with Pearson r.

    A pair is defined only when both words resolve to vectors with nonzero
    norm in both models; everything else counts toward undefined_fraction.
    """
    if not pairs:
        raise ValueError("no pairs to evaluate")
    points = []
    for wa, wb in pairs:
        vecs = (view_a.vector(wa), view_a.vector(wb), view_b.vector(wa), view_b.vector(wb))
        if any(v is None for v in vecs):
            continue
        sim_a = cosine(vecs[0], vecs[1])
        sim_b = cosine(vecs[2], vecs[3])
        if sim_a is None or sim_b is None:
            continue
        points.append((wa, wb, sim_a, sim_b))
    defined = len(points)
    r = pearson([p[2] for p in points], [p[3] for p in points]) if defined >= 2 else None
    return SimilarityReport(
        bucket_pair=bucket_pair,
        pairs_sampled=len(pairs),
        defined_pairs=defined,
        undefined_fraction=1.0 - defined / len(pairs),
        pearson_r=r,
        points=points,
    )


def nearest_neighbors(view: EmbeddingView, word: str, n: int) -> list[tuple[str, float]]:
    """Top-n words by cosine against the query's target vector.

    The query itself and zero-norm rows are excluded; ties break by word.
    """
    query = view.vector(word)
    if query is None:
        raise KeyError(f"word {word!r} not in model")
    if n <= 0:
        return []
    matrix = view.matrix.astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    qnorm = float(np.linalg.norm(query.astype(np.float64)))
    if qnorm == 0.0:
        return []
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = (matrix @ query.astype(np.float64)) / (norms * qnorm)
    scored = [
        (view.words[i], min(1.0, max(-1.0, float(sims[i]))))
        for i in range(len(view.words))
        if norms[i] != 0.0 and view.words[i] != word
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:n]
