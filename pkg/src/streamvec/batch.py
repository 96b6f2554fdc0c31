"""Two-pass word2vec-style SGNS reference trainer.

Pass one builds an exact min-count vocabulary and a 0.75-smoothed negative
sampling table; pass two (repeatable per epoch) trains embeddings with a
single global linear learning rate. This is the comparison model for the
streaming trainer: unlike it, windows at sentence edges are truncated and
trained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Optional

import numpy as np

from streamvec import corpus
from streamvec._kernels import impl
from streamvec.sgns import EmbeddingTable, init_table
from streamvec.stream import TrainerConfig


@dataclass
class BatchVocab:
    """Retained words with exact counts, densely indexed in rank order."""

    words: list[str]
    counts: np.ndarray  # int64, aligned with words
    index: dict[str, int]
    total_tokens: int

    def __len__(self) -> int:
        return len(self.words)


def build_vocab(source: corpus.Source, min_count: int = 5) -> BatchVocab:
    """Exact counting pass; words below min_count are dropped."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    table = corpus.exact_counts(source)
    ranked = [(w, c) for w, c in corpus.rank_by_frequency(table) if c >= min_count]
    words = [w for w, _ in ranked]
    counts = np.array([c for _, c in ranked], dtype=np.int64)
    return BatchVocab(
        words=words,
        counts=counts,
        index={w: i for i, w in enumerate(words)},
        total_tokens=int(counts.sum()) if len(counts) else 0,
    )


@dataclass
class NegativeTable:
    """Word ids repeated proportionally to count^0.75."""

    entries: np.ndarray  # int64


def build_negative_table(vocab: BatchVocab, table_len: int = 10_000_000) -> NegativeTable:
    """Largest-remainder fill of the smoothed unigram distribution.

    Deterministic: each word gets floor(len * p_w) slots, remaining slots go
    to the largest fractional parts (ties to the lower id). Per-word error
    is below 1/table_len.
    """
    if not len(vocab):
        raise ValueError("cannot build a negative table from an empty vocabulary")
    if table_len < len(vocab):
        raise ValueError("table_len must be at least the vocabulary size")
    weights = np.power(vocab.counts.astype(np.float64), 0.75)
    shares = table_len * weights / weights.sum()
    base = np.floor(shares).astype(np.int64)
    short = table_len - int(base.sum())
    if short:
        order = np.lexsort((np.arange(len(vocab)), -(shares - base)))
        base[order[:short]] += 1
    entries = np.repeat(np.arange(len(vocab), dtype=np.int64), base)
    return NegativeTable(entries=entries)


def batch_train(
    source: corpus.Source,
    vocab: BatchVocab,
    table: NegativeTable,
    config: TrainerConfig,
    epochs: int = 1,
    rng: Optional[np.random.Generator] = None,
    max_sentence_len: int = corpus.DEFAULT_MAX_SENTENCE_LEN,
) -> EmbeddingTable:
    """Standard SGNS over the corpus; the source is re-read once per epoch.

    The learning rate decays linearly from rho0 to rho_min, indexed by
    in-vocabulary tokens encountered (before subsampling) out of
    epochs * total_tokens, and is refreshed at each sentence start.
    """
    config.validate()
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if epochs > 1 and not isinstance(source, (str, bytes)) and not hasattr(source, "__fspath__"):
        raise ValueError("multi-epoch training needs a re-readable source (path or bytes)")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(config.rng_seed))
    embeddings = init_table(len(vocab), config.dim, rng)
    if not len(vocab):
        return embeddings

    # retention probability per word id under the subsampling threshold
    freqs = vocab.counts.astype(np.float64) / vocab.total_tokens
    keep = np.minimum(1.0, np.sqrt(config.subsample_threshold / freqs))

    total_steps = epochs * vocab.total_tokens
    span = config.rho0 - config.rho_min
    index_get = vocab.index.get
    seen = 0
    for _ in range(epochs):
        for sentence in corpus.read_sentences(source, max_sentence_len):
            ids = [i for i in map(index_get, sentence) if i is not None]
            if not ids:
                continue
            alpha = config.rho_min + span * max(0.0, 1.0 - seen / total_steps)
            seen += len(ids)
            ids_arr = np.asarray(ids, dtype=np.int64)
            kept = ids_arr[rng.random(len(ids_arr)) < keep[ids_arr]]
            if len(kept) < 2:
                continue
            impl.train_batch_sentence(
                embeddings.target,
                embeddings.context,
                kept,
                alpha,
                config.context_radius,
                1 if config.dynamic_windows else 0,
                config.negatives,
                table.entries,
                rng,
            )
    return embeddings


def write_vocab_tsv(vocab: BatchVocab, out: IO[str]) -> None:
    for word, count in zip(vocab.words, vocab.counts):
        out.write(f"{word}\t{int(count)}\n")
