"""Bounded-memory streaming word embeddings.

A one-pass skip-gram-with-negative-sampling trainer whose vocabulary is a
space-saving sketch and whose negative sampling distribution is a
reservoir sample of the token stream, plus a two-pass batch reference
trainer and an intrinsic evaluation suite.
"""

from streamvec._kernels import BACKEND
from streamvec.batch import BatchVocab, NegativeTable, batch_train, build_negative_table, build_vocab
from streamvec.checkpoint import (
    CheckpointError,
    export_embeddings,
    load_checkpoint,
    load_embeddings_text,
    load_model_view,
    save_checkpoint,
)
from streamvec.corpus import CountTable, Sentence, exact_counts, rank_by_frequency, read_sentences
from streamvec.evaluation import (
    CountErrorReport,
    EmbeddingView,
    SimilarityReport,
    count_error_report,
    nearest_neighbors,
    pearson,
    sample_bucket_pairs,
    similarity_correlation,
)
from streamvec.reservoir import Reservoir
from streamvec.sgns import (
    EmbeddingTable,
    GradientStepSpec,
    SlotLearningState,
    cosine,
    init_table,
    learning_rate,
    reset_slot,
    sgns_step,
    sigmoid,
)
from streamvec.sketch import ObserveOutcome, SpaceSavingSketch
from streamvec.stream import StreamModel, TrainerConfig, TrainStats, effective_radius

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BatchVocab",
    "CheckpointError",
    "CountErrorReport",
    "CountTable",
    "EmbeddingTable",
    "EmbeddingView",
    "GradientStepSpec",
    "NegativeTable",
    "ObserveOutcome",
    "Reservoir",
    "Sentence",
    "SimilarityReport",
    "SlotLearningState",
    "SpaceSavingSketch",
    "StreamModel",
    "TrainStats",
    "TrainerConfig",
    "batch_train",
    "build_negative_table",
    "build_vocab",
    "cosine",
    "count_error_report",
    "effective_radius",
    "exact_counts",
    "export_embeddings",
    "init_table",
    "learning_rate",
    "load_checkpoint",
    "load_embeddings_text",
    "load_model_view",
    "nearest_neighbors",
    "pearson",
    "rank_by_frequency",
    "read_sentences",
    "reset_slot",
    "sample_bucket_pairs",
    "save_checkpoint",
    "sgns_step",
    "sigmoid",
    "similarity_correlation",
]
