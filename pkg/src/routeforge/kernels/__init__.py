"""Similarity kernels with a compiled fast path.

The Cython extension is preferred when it was built; otherwise the numpy
fallback is used. Both produce bit-identical scores, so callers never
need to know which backend is active (``BACKEND`` reports it, and
``benchmarks/bench_kernels.py`` compares their throughput).
"""

try:
    from routeforge.kernels import _ckernels as _impl
    BACKEND = "compiled"
except ImportError:  # extension not built
    from routeforge.kernels import pykernels as _impl
    BACKEND = "python"

from routeforge.kernels import pykernels

tanimoto_block = _impl.tanimoto_block
tfidf_accumulate = _impl.tfidf_accumulate

__all__ = ["BACKEND", "tanimoto_block", "tfidf_accumulate", "pykernels"]
