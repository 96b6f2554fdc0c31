"""Skip-gram negative sampling numerical core.

Embeddings live in two K x D float32 matrices indexed by sketch slot;
each slot carries its own step counter, from which a decaying learning
rate is derived. Slots are re-initialized from N(0,1) when their word is
ejected from the vocabulary sketch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from streamvec._kernels import impl

SCHEDULE_CODES = {"linear": impl.SCHEDULE_LINEAR, "poly": impl.SCHEDULE_POLY}


@dataclass
class EmbeddingTable:
    """Slot-indexed target and context vectors (always finite)."""

    target: np.ndarray
    context: np.ndarray

    @property
    def rows(self) -> int:
        return self.target.shape[0]

    @property
    def dim(self) -> int:
        return self.target.shape[1]


@dataclass
class SlotLearningState:
    """Per-slot step counters plus the shared schedule parameters."""

    steps: np.ndarray  # int64, each >= 1
    rho0: float = 2.5e-2
    rho_min: float = 2.5e-6
    horizon: float = 100_000.0
    tau: float = 1.0
    kappa: float = 0.5
    schedule: str = "linear"

    @classmethod
    def new(cls, slots: int, **kwargs) -> "SlotLearningState":
        return cls(steps=np.ones(slots, dtype=np.int64), **kwargs)

    @property
    def schedule_code(self) -> int:
        return SCHEDULE_CODES[self.schedule]


@dataclass
class GradientStepSpec:
    """Slots taking part in one gradient step."""

    input_slot: int
    output_slot: int
    negative_slots: Sequence[int] = field(default_factory=tuple)


def sigmoid(x: float) -> float:
    """Logistic function, stable for |x| well past 700."""
    return impl.sigmoid(float(x))


def init_table(rows: int, dim: int, rng: np.random.Generator) -> EmbeddingTable:
    """Fresh table with every entry drawn from the standard normal."""
    if rows < 1 or dim < 1:
        raise ValueError("table dimensions must be >= 1")
    target = rng.standard_normal((rows, dim), dtype=np.float32)
    context = rng.standard_normal((rows, dim), dtype=np.float32)
    return EmbeddingTable(target=target, context=context)


def reset_slot(
    table: EmbeddingTable, state: SlotLearningState, slot: int, rng: np.random.Generator
) -> None:
    """Redraw one slot's rows from N(0,1) and restart its step counter."""
    if not 0 <= slot < table.rows:
        raise IndexError(f"slot {slot} out of range")
    table.target[slot] = rng.standard_normal(table.dim, dtype=np.float32)
    table.context[slot] = rng.standard_normal(table.dim, dtype=np.float32)
    state.steps[slot] = 1


def learning_rate(state: SlotLearningState, slot: int) -> float:
    """Current rate for a slot under the configured schedule."""
    return impl.slot_rate(
        int(state.steps[slot]),
        state.rho0,
        state.rho_min,
        state.horizon,
        state.tau,
        state.kappa,
        state.schedule_code,
    )


def sgns_step(table: EmbeddingTable, state: SlotLearningState, spec: GradientStepSpec) -> None:
    """One gradient step on (input, output) plus negative samples.

    Uses pre-update caching: the input-row accumulator multiplies each
    context row's value from before that row's own update. Step counters
    of all distinct participating slots advance by one afterwards.
    """
    rows = table.rows
    negs = np.asarray(spec.negative_slots, dtype=np.int64)
    for slot in (spec.input_slot, spec.output_slot):
        if not 0 <= slot < rows:
            raise IndexError(f"slot {slot} out of range")
    if negs.size and (negs.min() < 0 or negs.max() >= rows):
        raise IndexError("negative slot out of range")
    impl.pair_step(
        table.target,
        table.context,
        state.steps,
        state.rho0,
        state.rho_min,
        state.horizon,
        state.tau,
        state.kappa,
        state.schedule_code,
        int(spec.input_slot),
        int(spec.output_slot),
        negs,
    )


def cosine(u: np.ndarray, v: np.ndarray) -> Optional[float]:
    """Cosine similarity in [-1, 1]; None when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return None
    value = float(u @ v) / (nu * nv)
    return min(1.0, max(-1.0, value))
