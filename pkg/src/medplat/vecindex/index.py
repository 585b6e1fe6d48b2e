"""Exact top-k cosine retrieval over an in-memory chunk store, with versioned
file persistence.

Queries score every eligible chunk (no approximation) through the selected
kernel backend and rank by descending score, ties broken by ascending
chunk_id. Mutations rebuild the scoring snapshot under a lock; readers only
ever see a complete snapshot.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..errors import ArgumentError, FormatError, UndefinedSimilarityError
from . import kernels
from .chunking import Chunk
from .embedder import DEFAULT_DIM, EmbeddingVector

FORMAT_MAGIC = "medplat-vecindex"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScoredHit:
    chunk_id: str
    score: float
    rank: int


class _Snapshot:
    """Immutable scoring view: parallel chunk list and row matrix."""

    def __init__(self, chunks: list[Chunk]):
        self.chunks = chunks
        if chunks:
            self.matrix = np.array([c.vector.values for c in chunks], dtype=np.float64)
        else:
            self.matrix = None


class VectorIndex:
    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ArgumentError(f"dim must be positive, got {dim}")
        self.dim = dim
        self._chunks: dict[str, Chunk] = {}
        self._lock = threading.Lock()
        self._snapshot: _Snapshot | None = _Snapshot([])

    def __len__(self):
        return len(self._chunks)

    def __contains__(self, chunk_id: str):
        return chunk_id in self._chunks

    def get(self, chunk_id: str) -> Chunk | None:
        return self._chunks.get(chunk_id)

    def chunk_ids(self) -> list[str]:
        return sorted(self._chunks)

    def upsert(self, chunk: Chunk) -> "VectorIndex":
        if chunk.vector.dim != self.dim:
            raise ArgumentError(
                f"chunk {chunk.chunk_id!r} has dim {chunk.vector.dim}, index has dim {self.dim}"
            )
        with self._lock:
            self._chunks[chunk.chunk_id] = chunk
            self._snapshot = None
        return self

    def remove(self, chunk_id: str) -> bool:
        """Drop a chunk; removing an absent id is a no-op returning False."""
        with self._lock:
            if chunk_id not in self._chunks:
                return False
            del self._chunks[chunk_id]
            self._snapshot = None
        return True

    def _current_snapshot(self) -> _Snapshot:
        with self._lock:
            if self._snapshot is None:
                ordered = [self._chunks[cid] for cid in sorted(self._chunks)]
                self._snapshot = _Snapshot(ordered)
            return self._snapshot

    def top_k(
        self,
        query: EmbeddingVector,
        k: int,
        doc_filter: Callable[[str], bool] | None = None,
    ) -> list[ScoredHit]:
        if k < 1:
            raise ArgumentError(f"k must be >= 1, got {k}")
        if query.dim != self.dim:
            raise ArgumentError(f"query dim {query.dim} does not match index dim {self.dim}")
        if query.is_zero:
            raise UndefinedSimilarityError("cannot search with a zero query vector")
        snap = self._current_snapshot()
        if snap.matrix is None:
            return []
        scores = kernels.cosine_scores(snap.matrix, np.asarray(query.values, dtype=np.float64))
        eligible = [
            (float(scores[i]), c.chunk_id)
            for i, c in enumerate(snap.chunks)
            if doc_filter is None or doc_filter(c.doc_id)
        ]
        # snapshot rows are already in ascending chunk_id order, so a stable
        # sort on descending score yields the required tie-break
        eligible.sort(key=lambda pair: -pair[0])
        return [
            ScoredHit(chunk_id=cid, score=score, rank=rank)
            for rank, (score, cid) in enumerate(eligible[:k], start=1)
        ]


def upsert(index: VectorIndex, chunk: Chunk) -> VectorIndex:
    return index.upsert(chunk)


def remove(index: VectorIndex, chunk_id: str) -> bool:
    return index.remove(chunk_id)


def top_k(index, query, k, doc_filter=None):
    return index.top_k(query, k, doc_filter)


def _format_value(v: float) -> str:
    return format(v, ".17g")


def save_index(index: VectorIndex, path) -> None:
    """Header line (magic, version, dim, count) then one JSON chunk per line.

    Floats go out as 17-significant-digit decimals so a load is value-identical.
    """
    snap = index._current_snapshot()
    with Path(path).open("w", encoding="utf-8") as fh:
        header = {
            "magic": FORMAT_MAGIC,
            "version": FORMAT_VERSION,
            "dim": index.dim,
            "count": len(snap.chunks),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for chunk in snap.chunks:
            record = {
                "chunk_id": chunk.chunk_id,
                "doc_id": chunk.doc_id,
                "text": chunk.text,
                "span": list(chunk.span),
                "normalizable": chunk.vector.normalizable,
                "values": [_format_value(v) for v in chunk.vector.values],
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def load_index(path) -> VectorIndex:
    with Path(path).open(encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise FormatError("empty index file: missing header")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError:
            raise FormatError("index header is not valid JSON") from None
        if not isinstance(header, dict) or header.get("magic") != FORMAT_MAGIC:
            raise FormatError("index header magic missing or wrong")
        if header.get("version") != FORMAT_VERSION:
            raise FormatError(
                f"unsupported index format version {header.get('version')!r} "
                f"(expected {FORMAT_VERSION})"
            )
        dim = header.get("dim")
        count = header.get("count")
        if not isinstance(dim, int) or dim < 1 or not isinstance(count, int) or count < 0:
            raise FormatError("index header dim/count invalid")
        index = VectorIndex(dim=dim)
        loaded = 0
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                raise FormatError(f"corrupt chunk record after {loaded} chunks") from None
            values = tuple(float(v) for v in rec["values"])
            if len(values) != dim:
                raise FormatError(f"chunk {rec.get('chunk_id')!r} has wrong dimension")
            vector = EmbeddingVector(values=values, normalizable=rec.get("normalizable", True))
            index.upsert(
                Chunk(
                    chunk_id=rec["chunk_id"],
                    doc_id=rec["doc_id"],
                    text=rec["text"],
                    span=tuple(rec["span"]),
                    vector=vector,
                )
            )
            loaded += 1
        if loaded != count:
            raise FormatError(f"truncated index file: header says {count} chunks, found {loaded}")
    return index
