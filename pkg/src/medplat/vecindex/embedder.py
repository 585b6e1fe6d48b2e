"""Deterministic reference embedder: hashed character 3-grams.

Stands in for the external embedding service so every pipeline above it is
reproducible: lowercase, extract character 3-grams, hash each with FNV-1a
64-bit into one of `dim` buckets, accumulate counts, L2-normalize. Texts too
short to yield a 3-gram embed to the zero vector, flagged non-normalizable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ArgumentError, UndefinedSimilarityError

MIN_DIM = 8
DEFAULT_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    normalizable: bool = True

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ArgumentError("embedding values must be finite")

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


def reference_embed(text: str, dim: int = DEFAULT_DIM) -> EmbeddingVector:
    if dim < MIN_DIM:
        raise ArgumentError(f"dim must be >= {MIN_DIM}, got {dim}")
    folded = text.lower()
    counts = [0] * dim
    for i in range(len(folded) - 2):
        gram = folded[i : i + 3]
        counts[fnv1a_64(gram.encode("utf-8")) % dim] += 1
    norm = math.sqrt(sum(c * c for c in counts))
    if norm == 0.0:
        return EmbeddingVector(values=(0.0,) * dim, normalizable=False)
    return EmbeddingVector(values=tuple(c / norm for c in counts))


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """dot(u,v)/(|u||v|), clamped to [-1, 1]."""
    if u.dim != v.dim:
        raise ArgumentError(f"dimension mismatch: {u.dim} vs {v.dim}")
    if u.is_zero or v.is_zero:
        raise UndefinedSimilarityError("cosine undefined for the zero vector")
    dot = sum(a * b for a, b in zip(u.values, v.values))
    nu = math.sqrt(sum(a * a for a in u.values))
    nv = math.sqrt(sum(b * b for b in v.values))
    return max(-1.0, min(1.0, dot / (nu * nv)))
