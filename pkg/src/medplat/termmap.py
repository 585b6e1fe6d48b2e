"""Free-text clinical terms to ranked SNOMED-CT / LOINC concept candidates.

Exact lexical matches short-circuit at score 1.0; everything else ranks by
embedding cosine against a per-concept vector built from the preferred term
and synonyms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import ArgumentError, EmptyDictionaryError, ParseError, ValidationError
from .vecindex import EmbeddingVector, cosine, reference_embed

SYSTEMS = ("SNOMED-CT", "LOINC")

MATCHED_PREFERRED = "preferred_term"
MATCHED_SYNONYM = "synonym"
MATCHED_EMBEDDING = "embedding"


@dataclass(frozen=True)
class Concept:
    system: str
    code: str
    preferred_term: str
    synonyms: tuple[str, ...]
    vector: EmbeddingVector

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValidationError(f"unknown coding system {self.system!r}")
        if not self.preferred_term:
            raise ValidationError(f"concept {self.system}/{self.code}: empty preferred_term")

    @property
    def key(self) -> tuple[str, str]:
        return (self.system, self.code)


@dataclass(frozen=True)
class MappingCandidate:
    concept: Concept
    score: float
    rank: int
    matched_via: str


class ConceptDictionary:
    def __init__(self, concepts: list[Concept]):
        self._concepts: dict[tuple[str, str], Concept] = {}
        for concept in concepts:
            if concept.key in self._concepts:
                raise ValidationError(
                    f"duplicate concept ({concept.system}, {concept.code})"
                )
            self._concepts[concept.key] = concept

    def __len__(self):
        return len(self._concepts)

    def __iter__(self):
        return iter(self._concepts.values())

    def filtered(self, system: str | None) -> list[Concept]:
        if system is None:
            return list(self._concepts.values())
        return [c for c in self._concepts.values() if c.system == system]


def concept_text(preferred_term: str, synonyms: list[str]) -> str:
    return " ".join([preferred_term, *synonyms])


def load_concepts(
    path,
    embedder: Callable[[str], EmbeddingVector] = reference_embed,
) -> ConceptDictionary:
    concepts = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            try:
                synonyms = tuple(obj.get("synonyms", []))
                concepts.append(
                    Concept(
                        system=obj["system"],
                        code=obj["code"],
                        preferred_term=obj["preferred_term"],
                        synonyms=synonyms,
                        vector=embedder(concept_text(obj["preferred_term"], list(synonyms))),
                    )
                )
            except KeyError as exc:
                raise ValidationError(f"concept record missing field {exc.args[0]!r}") from None
    return ConceptDictionary(concepts)


def _exact_match(concept: Concept, needle: str) -> str | None:
    if concept.preferred_term.lower() == needle:
        return MATCHED_PREFERRED
    if any(s.lower() == needle for s in concept.synonyms):
        return MATCHED_SYNONYM
    return None


def map_term(
    dictionary: ConceptDictionary,
    text: str,
    system_filter: str | None = None,
    k: int = 5,
    embedder: Callable[[str], EmbeddingVector] = reference_embed,
) -> list[MappingCandidate]:
    if not text.strip():
        raise ArgumentError("text must be nonempty")
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    pool = dictionary.filtered(system_filter)
    if not pool:
        raise EmptyDictionaryError(
            f"no concepts available (system_filter={system_filter!r})"
        )
    needle = text.lower()

    exact: tuple[Concept, str] | None = None
    for concept in sorted(pool, key=lambda c: c.key):
        via = _exact_match(concept, needle)
        if via is not None:
            exact = (concept, via)
            break

    candidates: list[MappingCandidate] = []
    if exact is not None:
        candidates.append(
            MappingCandidate(concept=exact[0], score=1.0, rank=1, matched_via=exact[1])
        )

    query = embedder(text)
    scored = []
    for concept in pool:
        if exact is not None and concept.key == exact[0].key:
            continue
        if query.is_zero or concept.vector.is_zero:
            score = 0.0
        else:
            score = cosine(query, concept.vector)
        scored.append((score, concept))
    scored.sort(key=lambda pair: (-pair[0], pair[1].key))
    for score, concept in scored[: k - len(candidates)]:
        candidates.append(
            MappingCandidate(
                concept=concept,
                score=score,
                rank=len(candidates) + 1,
                matched_via=MATCHED_EMBEDDING,
            )
        )
    return candidates


@dataclass(frozen=True)
class BatchItem:
    """One batch element: either a candidate list or that element's error."""

    candidates: list[MappingCandidate] | None
    error: str | None = None


def map_batch(
    dictionary: ConceptDictionary,
    texts: list[str],
    system_filter: str | None = None,
    k: int = 5,
    embedder: Callable[[str], EmbeddingVector] = reference_embed,
) -> list[BatchItem]:
    """Elementwise map_term; a bad element reports its error and the batch
    continues."""
    out = []
    for text in texts:
        try:
            out.append(
                BatchItem(candidates=map_term(dictionary, text, system_filter, k, embedder))
            )
        except (ArgumentError, EmptyDictionaryError) as exc:
            out.append(BatchItem(candidates=None, error=str(exc)))
    return out
