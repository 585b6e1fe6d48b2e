# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled cosine-scoring kernel for the exact top-k search hot loop."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"


def cosine_scores(cnp.float64_t[:, ::1] matrix, cnp.float64_t[::1] query):
    """Cosine similarity of `query` against every row of `matrix`.

    Rows with zero norm score 0.0 (callers reject zero queries upstream).
    Results are clamped to [-1, 1].
    """
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    cdef Py_ssize_t i, j
    cdef double dot, row_sq, qnorm, s
    out_arr = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr

    qnorm = 0.0
    for j in range(d):
        qnorm += query[j] * query[j]
    qnorm = sqrt(qnorm)

    for i in range(n):
        dot = 0.0
        row_sq = 0.0
        for j in range(d):
            dot += matrix[i, j] * query[j]
            row_sq += matrix[i, j] * matrix[i, j]
        if row_sq == 0.0 or qnorm == 0.0:
            out[i] = 0.0
            continue
        s = dot / (sqrt(row_sq) * qnorm)
        if s > 1.0:
            s = 1.0
        elif s < -1.0:
            s = -1.0
        out[i] = s
    return out_arr
