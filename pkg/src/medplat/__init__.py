"""medplat: desk-scale medical research data platform backend.

Subsystems: dataset catalog with tiered access metadata, exact-cosine vector
retrieval, dataset/paper semantic search, ATC drug search, terminology
mapping, RAG chat/translation orchestration, research-pod policy
enforcement, and an HTTP gateway + CLI binding them together.
"""

from importlib import resources

__version__ = "0.1.0"


def fixture_path(name: str):
    """Filesystem path of a bundled fixture file."""
    return resources.files("medplat") / "fixtures" / name
