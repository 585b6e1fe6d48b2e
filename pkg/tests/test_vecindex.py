import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import oracle_cosine, oracle_top_k
from medplat.errors import ArgumentError, FormatError, UndefinedSimilarityError
from medplat.vecindex import (
    Chunk,
    EmbeddingVector,
    VectorIndex,
    chunk_document,
    cosine,
    fnv1a_64,
    load_index,
    reference_embed,
    save_index,
)
from medplat.vecindex import _pykernels
from medplat.vecindex import kernels


class TestFnv1a:
    def test_published_test_vectors(self):
        # standard FNV-1a 64-bit reference values
        assert fnv1a_64(b"") == 0xCBF29CE484222325
        assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a_64(b"foobar") == 0x85944171F73967E8


class TestReferenceEmbed:
    def test_empty_text_is_zero_vector(self):
        vec = reference_embed("", 256)
        assert vec.is_zero
        assert not vec.normalizable
        assert vec.dim == 256

    def test_deterministic(self):
        a = reference_embed("electrocardiogram", 64)
        b = reference_embed("electrocardiogram", 64)
        assert a.values == b.values

    def test_case_folding(self):
        assert reference_embed("ecg", 256).values == reference_embed("ECG", 256).values

    def test_unit_norm(self):
        vec = reference_embed("twelve-lead electrocardiogram waveforms", 128)
        norm = math.sqrt(sum(v * v for v in vec.values))
        assert abs(norm - 1.0) < 1e-9

    def test_dim_lower_bound(self):
        with pytest.raises(ArgumentError):
            reference_embed("abc", 7)

    def test_short_text_no_grams(self):
        assert reference_embed("ab", 16).is_zero

    @given(st.text(max_size=40), st.integers(min_value=8, max_value=64))
    def test_pure_function(self, text, dim):
        assert reference_embed(text, dim).values == reference_embed(text, dim).values


class TestCosine:
    def test_identity(self):
        u = EmbeddingVector((1.0, 0.0, 0.0) + (0.0,) * 5)
        assert cosine(u, u) == 1.0

    def test_orthogonal(self):
        u = EmbeddingVector((1.0, 0.0))
        v = EmbeddingVector((0.0, 1.0))
        assert cosine(u, v) == 0.0

    def test_forty_five_degrees(self):
        u = EmbeddingVector((1.0, 1.0))
        v = EmbeddingVector((1.0, 0.0))
        assert abs(cosine(u, v) - 0.7071067811865475) < 1e-9

    def test_dim_mismatch(self):
        with pytest.raises(ArgumentError):
            cosine(EmbeddingVector((1.0, 0.0)), EmbeddingVector((1.0, 0.0, 0.0)))

    def test_zero_vector(self):
        with pytest.raises(UndefinedSimilarityError):
            cosine(EmbeddingVector((0.0, 0.0)), EmbeddingVector((1.0, 0.0)))

    vectors = st.lists(
        st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=4, max_size=4
    ).filter(lambda vs: any(v != 0 for v in vs))

    @given(vectors, vectors)
    def test_symmetry(self, u_vals, v_vals):
        u = EmbeddingVector(tuple(u_vals))
        v = EmbeddingVector(tuple(v_vals))
        assert cosine(u, v) == cosine(v, u)

    @given(st.text(min_size=3, max_size=40).filter(lambda t: len(t.lower()) >= 3))
    def test_self_similarity_of_unit_embeddings(self, text):
        vec = reference_embed(text, 32)
        if vec.is_zero:
            return
        assert abs(cosine(vec, vec) - 1.0) < 1e-9


class TestChunkDocument:
    def test_enumerated_windows(self):
        chunks = chunk_document("d", "abcdefghij", 4, 1)
        assert [c.span for c in chunks] == [(0, 4), (3, 7), (6, 10)]
        assert [c.chunk_id for c in chunks] == ["d#0", "d#1", "d#2"]
        assert [c.text for c in chunks] == ["abcd", "defg", "ghij"]

    def test_short_text_single_chunk(self):
        chunks = chunk_document("d", "ab", 4, 1)
        assert [c.span for c in chunks] == [(0, 2)]

    def test_overlap_ge_size_rejected(self):
        with pytest.raises(ArgumentError):
            chunk_document("d", "abc", 4, 4)

    def test_empty_text(self):
        assert chunk_document("d", "") == []

    @given(
        st.text(min_size=1, max_size=200),
        st.integers(min_value=1, max_value=50),
        st.integers(min_value=0, max_value=49),
    )
    def test_spans_tile_source(self, text, size, overlap):
        if overlap >= size:
            return
        chunks = chunk_document("d", text, size, overlap)
        spans = [c.span for c in chunks]
        assert spans[0][0] == 0
        assert spans[-1][1] == len(text)
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            assert s1 <= e0  # contiguous coverage
            if e1 - s1 == size or e1 < len(text):
                assert e0 - s1 == overlap
        for c in chunks:
            assert c.text == text[c.span[0] : c.span[1]]


def _chunk(chunk_id, values, doc_id=None):
    return Chunk(
        chunk_id=chunk_id,
        doc_id=doc_id or chunk_id.split("#")[0],
        text=chunk_id,
        span=(0, len(chunk_id)),
        vector=EmbeddingVector(tuple(float(v) for v in values)),
    )


class TestIndexMutation:
    def test_upsert_replaces(self):
        index = VectorIndex(dim=2)
        index.upsert(_chunk("a#0", (1, 0)))
        index.upsert(_chunk("a#0", (0, 1)))
        assert len(index) == 1
        assert index.get("a#0").vector.values == (0.0, 1.0)

    def test_remove_absent_is_noop(self):
        index = VectorIndex(dim=2)
        assert index.remove("missing") is False

    def test_remove_present(self):
        index = VectorIndex(dim=2)
        index.upsert(_chunk("a#0", (1, 0)))
        assert index.remove("a#0") is True
        assert len(index) == 0

    def test_dim_mismatch_rejected(self):
        index = VectorIndex(dim=256)
        with pytest.raises(ArgumentError):
            index.upsert(_chunk("a#0", (1,) * 128))


class TestTopK:
    def _three_chunk_index(self):
        index = VectorIndex(dim=2)
        index.upsert(_chunk("c#1", (1, 0)))
        index.upsert(_chunk("c#2", (0, 1)))
        index.upsert(_chunk("c#3", (0.6, 0.8)))
        return index

    def test_known_small_index(self):
        hits = self._three_chunk_index().top_k(EmbeddingVector((1.0, 0.0)), 2)
        assert [(h.chunk_id, round(h.score, 9)) for h in hits] == [
            ("c#1", 1.0),
            ("c#3", 0.6),
        ]
        assert [h.rank for h in hits] == [1, 2]

    def test_k_exceeds_index(self):
        hits = self._three_chunk_index().top_k(EmbeddingVector((1.0, 0.0)), 99)
        assert len(hits) == 3
        assert [h.rank for h in hits] == [1, 2, 3]

    def test_tie_break_ascending_chunk_id(self):
        index = VectorIndex(dim=2)
        index.upsert(_chunk("a#1", (1, 0)))
        index.upsert(_chunk("a#0", (1, 0)))
        hits = index.top_k(EmbeddingVector((1.0, 0.0)), 2)
        assert [h.chunk_id for h in hits] == ["a#0", "a#1"]

    def test_zero_query_rejected(self):
        with pytest.raises(UndefinedSimilarityError):
            self._three_chunk_index().top_k(EmbeddingVector((0.0, 0.0)), 1)

    def test_k_must_be_positive(self):
        with pytest.raises(ArgumentError):
            self._three_chunk_index().top_k(EmbeddingVector((1.0, 0.0)), 0)

    def test_doc_filter(self):
        index = VectorIndex(dim=2)
        index.upsert(_chunk("a#0", (1, 0)))
        index.upsert(_chunk("b#0", (1, 0)))
        hits = index.top_k(EmbeddingVector((1.0, 0.0)), 5, doc_filter=lambda d: d == "b")
        assert [h.chunk_id for h in hits] == ["b#0"]

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_oracle(self, data):
        rng_seed = data.draw(st.integers(min_value=0, max_value=2**31 - 1))
        dim = data.draw(st.sampled_from([8, 16]))
        n = data.draw(st.integers(min_value=1, max_value=60))
        k = data.draw(st.integers(min_value=1, max_value=70))
        rng = np.random.default_rng(rng_seed)
        index = VectorIndex(dim=dim)
        chunks = []
        for i in range(n):
            if chunks and rng.random() < 0.2:
                values = chunks[-1].vector.values  # force ties
            else:
                values = tuple(rng.normal(size=dim))
            chunk = _chunk(f"c#{i:03d}", values)
            index.upsert(chunk)
            chunks.append(chunk)
        query = EmbeddingVector(tuple(rng.normal(size=dim)))
        hits = index.top_k(query, k)
        expected = oracle_top_k(chunks, query.values, k)
        assert [h.chunk_id for h in hits] == [cid for cid, _ in expected]
        for h, (_, score) in zip(hits, expected):
            assert abs(h.score - score) < 1e-9

    def test_scale_invariance_of_ranking(self):
        rng = np.random.default_rng(7)
        index = VectorIndex(dim=8)
        scaled = VectorIndex(dim=8)
        for i in range(30):
            values = rng.normal(size=8)
            index.upsert(_chunk(f"c#{i:02d}", values))
            scaled.upsert(_chunk(f"c#{i:02d}", values * (1 + i)))
        query = EmbeddingVector(tuple(rng.normal(size=8)))
        assert [h.chunk_id for h in index.top_k(query, 30)] == [
            h.chunk_id for h in scaled.top_k(query, 30)
        ]


class TestKernelParity:
    def test_backends_agree(self):
        rng = np.random.default_rng(11)
        matrix = np.ascontiguousarray(rng.normal(size=(50, 32)))
        query = np.ascontiguousarray(rng.normal(size=32))
        selected = kernels.cosine_scores(matrix, query)
        fallback = _pykernels.cosine_scores(matrix, query)
        np.testing.assert_allclose(selected, fallback, atol=1e-12)

    def test_zero_rows_score_zero(self):
        matrix = np.zeros((3, 8))
        query = np.ones(8)
        assert list(kernels.cosine_scores(matrix, query)) == [0.0, 0.0, 0.0]


class TestPersistence:
    def _random_index(self, n=100, dim=16, seed=3):
        rng = np.random.default_rng(seed)
        index = VectorIndex(dim=dim)
        for i in range(n):
            index.upsert(_chunk(f"doc{i % 7}#{i}", rng.normal(size=dim), doc_id=f"doc{i % 7}"))
        return index

    def test_round_trip_is_identical(self, tmp_path):
        index = self._random_index()
        path = tmp_path / "index.vec"
        save_index(index, path)
        again = load_index(path)
        assert again.dim == index.dim
        assert again.chunk_ids() == index.chunk_ids()
        for cid in index.chunk_ids():
            a, b = index.get(cid), again.get(cid)
            assert a.vector.values == b.vector.values
            assert (a.doc_id, a.text, a.span) == (b.doc_id, b.text, b.span)

    def test_double_round_trip_bytes_equal(self, tmp_path):
        index = self._random_index()
        p1, p2 = tmp_path / "a.vec", tmp_path / "b.vec"
        save_index(index, p1)
        save_index(load_index(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.vec"
        path.write_text("")
        with pytest.raises(FormatError, match="empty"):
            load_index(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "v99.vec"
        path.write_text('{"magic": "medplat-vecindex", "version": 99, "dim": 8, "count": 0}\n')
        with pytest.raises(FormatError, match="99"):
            load_index(path)

    def test_truncated_file_rejected(self, tmp_path):
        index = self._random_index(n=10)
        path = tmp_path / "trunc.vec"
        save_index(index, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(FormatError, match="truncated"):
            load_index(path)
