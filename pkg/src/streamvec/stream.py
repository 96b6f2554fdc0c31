"""One-pass bounded-memory trainer.

Per sentence: subsample against the sketch's current relative frequencies,
insert every retained token into the sketch (resetting any ejected slot's
embeddings and learning rate) and its slot into the reservoir, then train
each full-width window whose words are all still resident. Windows touched
by a non-resident word are skipped whole.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from streamvec._kernels import impl
from streamvec.corpus import Sentence
from streamvec.reservoir import Reservoir
from streamvec.sgns import (
    SCHEDULE_CODES,
    EmbeddingTable,
    SlotLearningState,
    init_table,
    reset_slot,
)
from streamvec.sketch import REPLACED, SpaceSavingSketch

logger = logging.getLogger(__name__)


@dataclass
class TrainerConfig:
    """Hyperparameters shared by the streaming and batch trainers."""

    vocab_capacity: int = 100_000
    reservoir_capacity: int = 100_000_000
    negatives: int = 5
    dim: int = 100
    context_radius: int = 2
    subsample_threshold: float = 1e-3
    dynamic_windows: bool = True
    rho0: float = 2.5e-2
    rho_min: float = 2.5e-6
    horizon: float = 100_000.0
    tau: float = 1.0
    kappa: float = 0.5
    schedule: str = "linear"
    rng_seed: int = 1

    def validate(self) -> None:
        if min(self.vocab_capacity, self.reservoir_capacity, self.dim, self.context_radius) < 1:
            raise ValueError("capacities, dim and context radius must be >= 1")
        if self.negatives < 0:
            raise ValueError("negatives must be >= 0")
        if not self.subsample_threshold > 0:
            raise ValueError("subsample threshold must be positive")
        if self.rho_min > self.rho0:
            raise ValueError("rho_min must not exceed rho0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.schedule not in SCHEDULE_CODES:
            raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass
class TrainStats:
    sentences: int = 0
    tokens: int = 0
    retained_tokens: int = 0
    ejections: int = 0
    contexts_trained: int = 0
    contexts_skipped: int = 0


def effective_radius(config: TrainerConfig, rng: np.random.Generator) -> int:
    """Window radius for one position: uniform on {1..C} when dynamic."""
    if not config.dynamic_windows:
        return config.context_radius
    r = 1 + int(rng.random() * config.context_radius)
    return min(r, config.context_radius)


class StreamModel:
    """All state of the streaming trainer; sized by the config, never grows."""

    def __init__(self, config: TrainerConfig):
        config.validate()
        self.config = config
        self.rng = np.random.Generator(np.random.PCG64(config.rng_seed))
        self.sketch = SpaceSavingSketch(config.vocab_capacity)
        self.negatives = Reservoir(config.reservoir_capacity)
        self.table = init_table(config.vocab_capacity, config.dim, self.rng)
        self.learning = SlotLearningState.new(
            config.vocab_capacity,
            rho0=config.rho0,
            rho_min=config.rho_min,
            horizon=config.horizon,
            tau=config.tau,
            kappa=config.kappa,
            schedule=config.schedule,
        )
        self.stats = TrainStats()

    def subsample(self, sentence: Sentence, rng: Optional[np.random.Generator] = None) -> Sentence:
        """Drop frequent resident words with probability 1 - min(1, sqrt(t/f)).

        Words not resident in the sketch are always kept. One uniform is
        consumed per token.
        """
        rng = rng if rng is not None else self.rng
        core = self.sketch._core
        counts = core.counts
        slot_get = core.slot_of.get
        observed = core.observed
        threshold = self.config.subsample_threshold
        if not sentence:
            return []
        draws = rng.random(len(sentence))
        kept = []
        for i, word in enumerate(sentence):
            slot = slot_get(word)
            if slot is not None:
                freq = counts[slot] / observed
                if freq > threshold and draws[i] >= math.sqrt(threshold / freq):
                    continue
            kept.append(word)
        return kept

    def train_sentence(self, sentence: Sentence, rng: Optional[np.random.Generator] = None) -> None:
        rng = rng if rng is not None else self.rng
        stats = self.stats
        stats.sentences += 1
        stats.tokens += len(sentence)
        kept = self.subsample(sentence, rng)
        stats.retained_tokens += len(kept)
        if not kept:
            return
        core = self.sketch._core
        observe = core.observe
        reservoir = self.negatives
        for word in kept:
            slot, kind, _ejected = observe(word)
            if kind == REPLACED:
                stats.ejections += 1
                reset_slot(self.table, self.learning, slot, rng)
            reservoir.observe(slot, rng)
        cfg = self.config
        if len(kept) < 2 * cfg.context_radius + 1:
            return
        slot_get = core.slot_of.get
        slots = np.fromiter((slot_get(w, -1) for w in kept), dtype=np.int64, count=len(kept))
        trained, skipped = impl.train_stream_sentence(
            self.table.target,
            self.table.context,
            self.learning.steps,
            cfg.rho0,
            cfg.rho_min,
            cfg.horizon,
            cfg.tau,
            cfg.kappa,
            self.learning.schedule_code,
            slots,
            cfg.context_radius,
            1 if cfg.dynamic_windows else 0,
            cfg.negatives,
            reservoir.values,
            len(reservoir),
            rng,
        )
        stats.contexts_trained += trained
        stats.contexts_skipped += skipped

    def train_stream(
        self,
        sentences: Iterable[Sentence],
        rng: Optional[np.random.Generator] = None,
        log_every_tokens: int = 0,
    ) -> TrainStats:
        """Consume sentences in order; resumable. Returns a stats snapshot."""
        next_log = self.stats.tokens + log_every_tokens if log_every_tokens else None
        for sentence in sentences:
            self.train_sentence(sentence, rng)
            if next_log is not None and self.stats.tokens >= next_log:
                logger.info(
                    "tokens=%d ejections=%d min_sketch_count=%d",
                    self.stats.tokens,
                    self.stats.ejections,
                    self.sketch.min_count(),
                )
                next_log = self.stats.tokens + log_every_tokens
        return dataclasses.replace(self.stats)
