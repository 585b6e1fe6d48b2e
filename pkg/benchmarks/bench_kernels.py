"""Compare the compiled cosine kernel against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from medplat.vecindex import _pykernels

try:
    from medplat.vecindex import _ckernels
except ImportError:
    _ckernels = None


def bench(kernel, matrix, query, repeats=50):
    kernel.cosine_scores(matrix, query)  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        kernel.cosine_scores(matrix, query)
    return (time.perf_counter() - start) / repeats


def main():
    rng = np.random.default_rng(0)
    print(f"{'rows':>8} {'dim':>5} {'numpy (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for rows, dim in [(1_000, 64), (10_000, 64), (10_000, 256), (100_000, 256)]:
        matrix = rng.normal(size=(rows, dim))
        query = rng.normal(size=dim)
        t_py = bench(_pykernels, matrix, query)
        if _ckernels is None:
            print(f"{rows:>8} {dim:>5} {t_py * 1e3:>12.3f} {'n/a':>12} {'n/a':>8}")
            continue
        t_cy = bench(_ckernels, matrix, query)
        ok = np.allclose(
            _pykernels.cosine_scores(matrix, query),
            _ckernels.cosine_scores(matrix, query),
            atol=1e-12,
        )
        speedup = t_py / t_cy
        print(
            f"{rows:>8} {dim:>5} {t_py * 1e3:>12.3f} {t_cy * 1e3:>12.3f} {speedup:>7.2f}x"
            + ("" if ok else "  MISMATCH")
        )


if __name__ == "__main__":
    main()
