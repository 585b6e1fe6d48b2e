"""Pure-numpy fallback for the cosine-scoring kernel."""

import numpy as np

BACKEND = "numpy"


def cosine_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine similarity of `query` against every row of `matrix`.

    Zero-norm rows score 0.0; results clamped to [-1, 1]. Must stay
    numerically identical to the compiled kernel (same operation order
    per element up to IEEE summation differences below 1e-12).
    """
    qnorm = float(np.sqrt(np.dot(query, query)))
    dots = matrix @ query
    row_norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
    denom = row_norms * qnorm
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(denom > 0.0, dots / denom, 0.0)
    return np.clip(scores, -1.0, 1.0)
