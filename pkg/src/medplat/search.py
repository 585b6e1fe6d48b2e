"""Semantic search over dataset descriptions and a papers corpus.

Documents are chunked and embedded into one vector index per corpus; a
document's score is the max over its chunks (doc-max aggregation) so long
descriptions cannot dilute a strong local match.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .catalog import AccessTier, Catalog
from .errors import ArgumentError, ParseError, ValidationError
from .vecindex import (
    DEFAULT_CHUNK_SIZE,
    DEFAULT_DIM,
    DEFAULT_OVERLAP,
    EmbeddingVector,
    VectorIndex,
    chunk_document,
    reference_embed,
)

log = logging.getLogger(__name__)

SNIPPET_LIMIT = 240

KIND_DATASET = "dataset"
KIND_PAPER = "paper"


@dataclass(frozen=True)
class PaperDoc:
    id: str
    title: str
    abstract: str
    year: int | None = None

    @classmethod
    def from_dict(cls, obj: dict) -> "PaperDoc":
        try:
            return cls(
                id=obj["id"],
                title=obj["title"],
                abstract=obj["abstract"],
                year=obj.get("year"),
            )
        except KeyError as exc:
            raise ValidationError(f"paper record missing field {exc.args[0]!r}") from None


def load_papers(path) -> list[PaperDoc]:
    papers = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            papers.append(PaperDoc.from_dict(obj))
    return papers


@dataclass(frozen=True)
class SearchResult:
    kind: str
    target_id: str
    title: str
    snippet: str
    score: float
    tier: AccessTier | None = None


def _trim_snippet(text: str, limit: int = SNIPPET_LIMIT) -> str:
    if len(text) <= limit:
        return text
    cut = text.rfind(" ", 0, limit)
    if cut <= 0:
        cut = limit
    return text[:cut]


class SearchEngine:
    def __init__(
        self,
        dim: int = DEFAULT_DIM,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        overlap: int = DEFAULT_OVERLAP,
        embedder: Callable[[str], EmbeddingVector] | None = None,
    ):
        self.dim = dim
        self.chunk_size = chunk_size
        self.overlap = overlap
        self.embedder = embedder or (lambda text: reference_embed(text, dim))
        self.dataset_index = VectorIndex(dim=dim)
        self.paper_index = VectorIndex(dim=dim)
        self._dataset_meta: dict[str, tuple[str, AccessTier]] = {}
        self._paper_meta: dict[str, str] = {}

    def index_corpus(self, catalog: Catalog, papers: list[PaperDoc] | None = None) -> int:
        """Chunk and embed every dataset description and paper abstract;
        returns the number of documents indexed. Datasets with empty
        descriptions are skipped with a warning."""
        count = 0
        for rec in catalog:
            if not rec.description.strip():
                log.warning("dataset %r has an empty description; skipped", rec.id)
                continue
            for chunk in chunk_document(
                rec.id, rec.description, self.chunk_size, self.overlap, self.embedder
            ):
                self.dataset_index.upsert(chunk)
            self._dataset_meta[rec.id] = (rec.name, rec.tier)
            count += 1
        for paper in papers or []:
            for chunk in chunk_document(
                paper.id, paper.abstract, self.chunk_size, self.overlap, self.embedder
            ):
                self.paper_index.upsert(chunk)
            self._paper_meta[paper.id] = paper.title
            count += 1
        return count

    def _search(self, index: VectorIndex, query: str, k: int, doc_filter=None):
        """Doc-max aggregation: best chunk per document, then rank documents
        by that score, tie-break ascending doc id."""
        if not query.strip():
            raise ArgumentError("query must be nonempty")
        if k < 1:
            raise ArgumentError(f"k must be >= 1, got {k}")
        qvec = self.embedder(query)
        if qvec.is_zero:
            # query yields no 3-grams: nothing comparable
            return []
        hits = index.top_k(qvec, k=max(len(index), 1), doc_filter=doc_filter)
        best: dict[str, tuple[float, str]] = {}
        for hit in hits:
            chunk = index.get(hit.chunk_id)
            prev = best.get(chunk.doc_id)
            if prev is None or hit.score > prev[0]:
                best[chunk.doc_id] = (hit.score, chunk.text)
        ranked = sorted(best.items(), key=lambda item: (-item[1][0], item[0]))
        return ranked[:k]

    def search_datasets(
        self, query: str, k: int, tier_filter: AccessTier | None = None
    ) -> list[SearchResult]:
        def doc_filter(doc_id: str) -> bool:
            return tier_filter is None or self._dataset_meta[doc_id][1] is tier_filter

        return [
            SearchResult(
                kind=KIND_DATASET,
                target_id=doc_id,
                title=self._dataset_meta[doc_id][0],
                snippet=_trim_snippet(text),
                score=score,
                tier=self._dataset_meta[doc_id][1],
            )
            for doc_id, (score, text) in self._search(
                self.dataset_index, query, k, doc_filter
            )
        ]

    def search_papers(self, query: str, k: int) -> list[SearchResult]:
        return [
            SearchResult(
                kind=KIND_PAPER,
                target_id=doc_id,
                title=self._paper_meta[doc_id],
                snippet=_trim_snippet(text),
                score=score,
            )
            for doc_id, (score, text) in self._search(self.paper_index, query, k)
        ]
