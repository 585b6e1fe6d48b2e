import math

import pytest

from medplat import fixture_path
from medplat.catalog import load_catalog


@pytest.fixture(scope="session")
def catalog_path():
    return fixture_path("nstri_catalog.jsonl")


@pytest.fixture(scope="session")
def fixture_catalog(catalog_path):
    return load_catalog(catalog_path)


def oracle_cosine(u, v):
    """Independent cosine: plain Python accumulation, no clamping surprises."""
    dot = math.fsum(a * b for a, b in zip(u, v))
    nu = math.sqrt(math.fsum(a * a for a in u))
    nv = math.sqrt(math.fsum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return max(-1.0, min(1.0, dot / (nu * nv)))


def oracle_top_k(chunks, query_values, k, doc_filter=None):
    """Brute force: score every chunk, stable sort desc score / asc chunk_id."""
    scored = [
        (c.chunk_id, oracle_cosine(c.vector.values, query_values))
        for c in chunks
        if doc_filter is None or doc_filter(c.doc_id)
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def oracle_join(left, right, key):
    """Nested-loop inner join, left fields win."""
    out = []
    for lrow in left:
        for rrow in right:
            if lrow[key] == rrow[key]:
                merged = {}
                merged.update(rrow)
                merged.update(lrow)
                out.append(merged)
    return out
