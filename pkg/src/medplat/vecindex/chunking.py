"""Sliding-window document chunking with fixed character overlap."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import ArgumentError
from .embedder import EmbeddingVector, reference_embed

DEFAULT_CHUNK_SIZE = 480
DEFAULT_OVERLAP = 80


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    text: str
    span: tuple[int, int]
    vector: EmbeddingVector


def chunk_document(
    doc_id: str,
    text: str,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_OVERLAP,
    embedder: Callable[[str], EmbeddingVector] = reference_embed,
) -> list[Chunk]:
    """Windows of `chunk_size` chars advancing by chunk_size - overlap.

    Spans tile [0, len(text)); adjacent spans overlap exactly `overlap` chars
    except possibly the final, shorter window.
    """
    if chunk_size < 1:
        raise ArgumentError(f"chunk_size must be >= 1, got {chunk_size}")
    if not 0 <= overlap < chunk_size:
        raise ArgumentError(f"overlap must be in [0, chunk_size), got {overlap}")
    stride = chunk_size - overlap
    chunks = []
    start = 0
    while start < len(text):
        end = min(start + chunk_size, len(text))
        piece = text[start:end]
        chunks.append(
            Chunk(
                chunk_id=f"{doc_id}#{len(chunks)}",
                doc_id=doc_id,
                text=piece,
                span=(start, end),
                vector=embedder(piece),
            )
        )
        if end == len(text):
            break
        start += stride
    return chunks
