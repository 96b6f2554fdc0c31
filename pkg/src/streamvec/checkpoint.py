"""Bit-exact model persistence and text embedding export.

The checkpoint is a single self-describing binary file: magic bytes,
format version, a JSON header (config, stats, rng state, sketch rows,
section sizes) and little-endian fixed-width array sections, closed by a
CRC32 of everything after the magic. Restoring reproduces the model
exactly, so training continues bit-identically to an uninterrupted run.
"""

from __future__ import annotations

import dataclasses
import io
import json
import struct
import zlib
from typing import IO, Union

import numpy as np

from streamvec.reservoir import Reservoir
from streamvec.sgns import EmbeddingTable, SlotLearningState
from streamvec.sketch import SpaceSavingSketch
from streamvec.stream import StreamModel, TrainerConfig, TrainStats
from streamvec.evaluation import EmbeddingView

MAGIC = b"SVECCKPT"
FORMAT_VERSION = 1

PathOrFile = Union[str, "os.PathLike[str]", IO[bytes]]  # noqa: F821


class CheckpointError(Exception):
    """Raised for malformed, truncated or incompatible checkpoint files."""


def _config_to_dict(config: TrainerConfig) -> dict:
    return dataclasses.asdict(config)


def save_checkpoint(model: StreamModel, path) -> None:
    sketch_buf = io.StringIO()
    model.sketch.to_tsv(sketch_buf)
    sections = [
        model.negatives.to_bytes(),
        np.ascontiguousarray(model.learning.steps, dtype="<i8").tobytes(),
        np.ascontiguousarray(model.table.target, dtype="<f4").tobytes(),
        np.ascontiguousarray(model.table.context, dtype="<f4").tobytes(),
    ]
    header = {
        "config": _config_to_dict(model.config),
        "stats": dataclasses.asdict(model.stats),
        "rng": model.rng.bit_generator.state,
        "sketch_tsv": sketch_buf.getvalue(),
        "table": {"rows": model.table.rows, "dim": model.table.dim},
        "section_lengths": [len(s) for s in sections],
    }
    header_bytes = json.dumps(header).encode("utf-8")
    body = bytearray()
    body += struct.pack("<I", FORMAT_VERSION)
    body += struct.pack("<Q", len(header_bytes))
    body += header_bytes
    for section in sections:
        body += struct.pack("<Q", len(section))
        body += section
    body += struct.pack("<I", zlib.crc32(bytes(body)))
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes(body))


def load_checkpoint(path) -> StreamModel:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(MAGIC) + 8 or blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic bytes)")
    body = blob[len(MAGIC) :]
    if len(body) < 4:
        raise CheckpointError("checkpoint truncated")
    stored_crc = struct.unpack("<I", body[-4:])[0]
    body = body[:-4]
    if zlib.crc32(body) != stored_crc:
        raise CheckpointError("checkpoint corrupted (CRC mismatch)")
    off = 0

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(body):
            raise CheckpointError("checkpoint truncated")
        chunk = body[off : off + n]
        off += n
        return chunk

    version = struct.unpack("<I", take(4))[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    header_len = struct.unpack("<Q", take(8))[0]
    try:
        header = json.loads(take(header_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint header unreadable: {exc}") from exc

    sections = []
    for expected in header["section_lengths"]:
        n = struct.unpack("<Q", take(8))[0]
        if n != expected:
            raise CheckpointError("checkpoint section length mismatch")
        sections.append(take(n))
    if off != len(body):
        raise CheckpointError("trailing bytes in checkpoint")

    config = TrainerConfig(**header["config"])
    model = StreamModel.__new__(StreamModel)
    model.config = config
    try:
        model.sketch = SpaceSavingSketch.from_tsv(io.StringIO(header["sketch_tsv"]))
    except ValueError as exc:
        raise CheckpointError(f"sketch payload invalid: {exc}") from exc
    if model.sketch.capacity != config.vocab_capacity:
        raise CheckpointError("sketch capacity does not match config")
    try:
        model.negatives = Reservoir.from_bytes(sections[0])
    except ValueError as exc:
        raise CheckpointError(f"reservoir payload invalid: {exc}") from exc

    rows, dim = header["table"]["rows"], header["table"]["dim"]
    if rows != config.vocab_capacity or dim != config.dim:
        raise CheckpointError("embedding table shape does not match config")
    steps = np.frombuffer(sections[1], dtype="<i8").astype(np.int64)
    target = np.frombuffer(sections[2], dtype="<f4").astype(np.float32)
    context = np.frombuffer(sections[3], dtype="<f4").astype(np.float32)
    if len(steps) != rows or len(target) != rows * dim or len(context) != rows * dim:
        raise CheckpointError("array section size mismatch")
    if steps.min(initial=1) < 1:
        raise CheckpointError("step counters must be >= 1")
    table = EmbeddingTable(
        target=target.reshape(rows, dim), context=context.reshape(rows, dim)
    )
    if not (np.isfinite(table.target).all() and np.isfinite(table.context).all()):
        raise CheckpointError("non-finite embedding values")
    model.table = table
    model.learning = SlotLearningState(
        steps=steps,
        rho0=config.rho0,
        rho_min=config.rho_min,
        horizon=config.horizon,
        tau=config.tau,
        kappa=config.kappa,
        schedule=config.schedule,
    )
    bitgen = np.random.PCG64()
    try:
        bitgen.state = header["rng"]
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"rng state invalid: {exc}") from exc
    model.rng = np.random.Generator(bitgen)
    model.stats = TrainStats(**header["stats"])
    return model


def export_embeddings(view: EmbeddingView, path, fmt: str = "text") -> None:
    """Classic text format: '<count> <dim>' header then word + reals rows.

    Values are written with 9 significant digits, enough to round-trip
    float32 exactly.
    """
    if fmt != "text":
        raise ValueError(f"unknown export format {fmt!r}")
    dim = view.matrix.shape[1]
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(view)} {dim}\n")
        for i, word in enumerate(view.words):
            values = " ".join(f"{x:.9g}" for x in view.matrix[i])
            f.write(f"{word} {values}\n")


def load_embeddings_text(path) -> EmbeddingView:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError("bad embedding file header")
        count, dim = int(header[0]), int(header[1])
        words = []
        matrix = np.empty((count, dim), dtype=np.float32)
        for i in range(count):
            parts = f.readline().rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValueError(f"bad embedding row {i + 1}")
            words.append(parts[0])
            matrix[i] = [float(x) for x in parts[1:]]
    return EmbeddingView(words, matrix)


def load_model_view(path) -> EmbeddingView:
    """Load either a checkpoint or a text embedding file as a view."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
    if magic == MAGIC:
        return EmbeddingView.from_stream_model(load_checkpoint(path))
    return load_embeddings_text(path)
