"""Retrieval substrate: reference embedder, chunking, and exact top-k search."""

from .chunking import DEFAULT_CHUNK_SIZE, DEFAULT_OVERLAP, Chunk, chunk_document
from .embedder import (
    DEFAULT_DIM,
    MIN_DIM,
    EmbeddingVector,
    cosine,
    fnv1a_64,
    reference_embed,
)
from .index import (
    FORMAT_MAGIC,
    FORMAT_VERSION,
    ScoredHit,
    VectorIndex,
    load_index,
    remove,
    save_index,
    top_k,
    upsert,
)
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "Chunk",
    "DEFAULT_CHUNK_SIZE",
    "DEFAULT_DIM",
    "DEFAULT_OVERLAP",
    "EmbeddingVector",
    "FORMAT_MAGIC",
    "FORMAT_VERSION",
    "KERNEL_BACKEND",
    "MIN_DIM",
    "ScoredHit",
    "VectorIndex",
    "chunk_document",
    "cosine",
    "fnv1a_64",
    "load_index",
    "reference_embed",
    "remove",
    "save_index",
    "top_k",
    "upsert",
]
