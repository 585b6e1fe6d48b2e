import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from medplat import fixture_path
from medplat.errors import (
    ArgumentError,
    EmptyDictionaryError,
    ValidationError,
)
from medplat.termmap import (
    MATCHED_EMBEDDING,
    MATCHED_PREFERRED,
    MATCHED_SYNONYM,
    ConceptDictionary,
    concept_text,
    load_concepts,
    map_batch,
    map_term,
)


@pytest.fixture(scope="module")
def dictionary():
    return load_concepts(fixture_path("concepts.jsonl"))


def oracle_ranking(dictionary, text, system_filter, exclude_key=None):
    """Brute-force cosine oracle in exact rational arithmetic.

    Embedder outputs are unit vectors, so cosine reduces to the dot product;
    computing it with Fraction removes float-summation jitter and makes ties
    mathematically exact.
    """
    from fractions import Fraction

    from medplat.vecindex import reference_embed

    query = [Fraction(v) for v in reference_embed(text).values]
    scored = []
    for concept in dictionary.filtered(system_filter):
        if concept.key == exclude_key:
            continue
        dot = sum(q * Fraction(v) for q, v in zip(query, concept.vector.values))
        scored.append((concept.key, dot))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [(key, float(dot)) for key, dot in scored]


class TestLoadConcepts:
    def test_fixture_count(self, dictionary):
        assert len(dictionary) == 50

    def test_empty_file(self, tmp_path):
        path = tmp_path / "none.jsonl"
        path.write_text("")
        assert len(load_concepts(path)) == 0

    def test_duplicate_rejected(self, tmp_path):
        line = json.dumps(
            {
                "system": "SNOMED-CT",
                "code": "386661006",
                "preferred_term": "Fever",
                "synonyms": [],
            }
        )
        path = tmp_path / "dup.jsonl"
        path.write_text(line + "\n" + line + "\n")
        with pytest.raises(ValidationError, match="386661006"):
            load_concepts(path)

    def test_vectors_built_from_term_and_synonyms(self, dictionary):
        from medplat.vecindex import reference_embed

        concept = next(c for c in dictionary if c.code == "386661006")
        expected = reference_embed(concept_text("Fever", ["pyrexia", "febrile"]))
        assert concept.vector.values == expected.values


class TestMapTerm:
    def test_exact_preferred_term_short_circuits(self, dictionary):
        candidates = map_term(dictionary, "Fever", k=3)
        top = candidates[0]
        assert top.rank == 1
        assert top.score == 1.0
        assert top.matched_via == MATCHED_PREFERRED
        assert top.concept.code == "386661006"

    def test_exact_synonym_short_circuits(self, dictionary):
        candidates = map_term(dictionary, "pyrexia", k=3)
        assert candidates[0].matched_via == MATCHED_SYNONYM
        assert candidates[0].score == 1.0
        assert candidates[0].concept.code == "386661006"

    def test_non_exact_matches_brute_force_oracle(self, dictionary):
        candidates = map_term(dictionary, "fevr", k=10)
        assert all(c.matched_via == MATCHED_EMBEDDING for c in candidates)
        expected = oracle_ranking(dictionary, "fevr", None)[:10]
        assert [c.concept.key for c in candidates] == [key for key, _ in expected]
        for cand, (_, score) in zip(candidates, expected):
            assert abs(cand.score - score) < 1e-9

    def test_system_filter_soundness(self, dictionary):
        candidates = map_term(dictionary, "glucose in blood", system_filter="LOINC", k=8)
        assert candidates
        assert all(c.concept.system == "LOINC" for c in candidates)

    def test_filter_to_empty_dictionary(self, tmp_path):
        path = tmp_path / "snomed.jsonl"
        path.write_text(
            json.dumps(
                {
                    "system": "SNOMED-CT",
                    "code": "1",
                    "preferred_term": "thing",
                    "synonyms": [],
                }
            )
            + "\n"
        )
        snomed_only = load_concepts(path)
        with pytest.raises(EmptyDictionaryError):
            map_term(snomed_only, "thing", system_filter="LOINC")

    def test_blank_text_rejected(self, dictionary):
        with pytest.raises(ArgumentError):
            map_term(dictionary, "   ")

    def test_ranks_consecutive_scores_non_increasing(self, dictionary):
        candidates = map_term(dictionary, "heart", k=10)
        assert [c.rank for c in candidates] == list(range(1, len(candidates) + 1))
        scores = [c.score for c in candidates]
        assert scores == sorted(scores, reverse=True)

    def test_every_lexical_entry_short_circuits(self, dictionary):
        for concept in dictionary:
            for text, via in [
                (concept.preferred_term, MATCHED_PREFERRED),
                *[(s, MATCHED_SYNONYM) for s in concept.synonyms],
            ]:
                top = map_term(dictionary, text, k=1)[0]
                assert top.score == 1.0
                assert top.rank == 1
                assert top.matched_via in (MATCHED_PREFERRED, MATCHED_SYNONYM)


class TestMapBatch:
    def test_elementwise_equivalence(self, dictionary):
        texts = ["fever", "serum sodium", "fevr"]
        batch = map_batch(dictionary, texts, k=4)
        for item, text in zip(batch, texts):
            assert item.error is None
            single = map_term(dictionary, text, k=4)
            assert [c.concept.key for c in item.candidates] == [
                c.concept.key for c in single
            ]

    def test_empty_batch(self, dictionary):
        assert map_batch(dictionary, []) == []

    def test_error_isolation(self, dictionary):
        batch = map_batch(dictionary, ["fever", ""], k=2)
        assert batch[0].error is None
        assert batch[1].candidates is None
        assert batch[1].error

    @given(
        texts=st.lists(
            st.sampled_from(["fever", "flu", "rash", "", "pulse rate"]), max_size=6
        )
    )
    @settings(max_examples=25, deadline=None)
    def test_batch_equals_singles(self, texts, dictionary):
        batch = map_batch(dictionary, texts, k=3)
        assert len(batch) == len(texts)
        for item, text in zip(batch, texts):
            if not text.strip():
                assert item.error is not None
                continue
            single = map_term(dictionary, text, k=3)
            assert [(c.concept.key, c.rank) for c in item.candidates] == [
                (c.concept.key, c.rank) for c in single
            ]
