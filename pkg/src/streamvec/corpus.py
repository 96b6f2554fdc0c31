"""Corpus ingestion: tokenized sentence streams and exact ground-truth counts.

Tokenization is deliberately minimal: lowercase, split on ASCII whitespace.
A newline ends a sentence; corpora without newlines (text8 is a single
100 MB line) are chunked into pseudo-sentences of at most
``max_sentence_len`` tokens so that context iteration stays local.
"""

from __future__ import annotations

import codecs
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterator, Union

# A sentence is a plain list of non-empty, whitespace-free tokens.
Sentence = list[str]

Source = Union[str, os.PathLike, bytes, IO[bytes]]

DEFAULT_MAX_SENTENCE_LEN = 1000

_CHUNK_BYTES = 1 << 20

# Map the non-newline ASCII whitespace characters to a space so a single
# str.split(" ") pass separates tokens without touching Unicode spaces.
_WS_TO_SPACE = str.maketrans({"\t": " ", "\r": " ", "\x0b": " ", "\x0c": " "})


def _open_source(source: Source) -> tuple[IO[bytes], bool]:
    """Return a binary stream for *source* and whether we own (must close) it."""
    if isinstance(source, bytes):
        return io.BytesIO(source), True
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb"), True
    if isinstance(source, io.TextIOBase):
        raise TypeError("corpus sources must be binary streams, not text mode")
    if hasattr(source, "read"):
        return source, False
    raise TypeError(f"unsupported corpus source: {type(source).__name__}")


def read_sentences(
    source: Source, max_sentence_len: int = DEFAULT_MAX_SENTENCE_LEN
) -> Iterator[Sentence]:
    """Stream tokenized sentences from a UTF-8 byte source.

    Sentences longer than ``max_sentence_len`` are split into consecutive
    chunks of at most that many tokens. Empty sentences are skipped.
    Invalid UTF-8 raises UnicodeDecodeError.
    """
    if max_sentence_len < 1:
        raise ValueError("max_sentence_len must be >= 1")
    stream, owned = _open_source(source)
    try:
        decoder = codecs.getincrementaldecoder("utf-8")()
        pending = ""  # trailing partial token (no whitespace inside)
        current: Sentence = []
        while True:
            raw = stream.read(_CHUNK_BYTES)
            if isinstance(raw, str):
                raise TypeError("corpus sources must yield bytes")
            at_eof = not raw
            text = pending + decoder.decode(raw, final=at_eof).translate(_WS_TO_SPACE).lower()
            pending = ""
            lines = text.split("\n")
            for i, line in enumerate(lines):
                is_tail = i == len(lines) - 1
                words = line.split(" ")
                if is_tail and not at_eof:
                    # The final piece may be an incomplete token; carry it over.
                    pending = words.pop() if words else ""
                for word in words:
                    if word:
                        current.append(word)
                        if len(current) == max_sentence_len:
                            yield current
                            current = []
                if not is_tail and current:
                    yield current
                    current = []
            if at_eof:
                if current:
                    yield current
                return
    finally:
        if owned:
            stream.close()


@dataclass
class CountTable:
    """Exact per-word-type counts over a corpus."""

    entries: dict[str, int] = field(default_factory=dict)
    total: int = 0


def exact_counts(source: Source) -> CountTable:
    """One pass of exact word counting over the whole source."""
    counter: Counter[str] = Counter()
    total = 0
    for sentence in read_sentences(source):
        counter.update(sentence)
        total += len(sentence)
    return CountTable(entries=dict(counter), total=total)


def rank_by_frequency(table: CountTable) -> list[tuple[str, int]]:
    """Words ordered by descending count, ties broken by ascending word."""
    return sorted(table.entries.items(), key=lambda item: (-item[1], item[0]))


def write_counts_tsv(table: CountTable, out: IO[str]) -> None:
    """Emit the count table as word<TAB>count rows in rank order."""
    for word, count in rank_by_frequency(table):
        out.write(f"{word}\t{count}\n")
