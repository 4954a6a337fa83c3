# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled similarity kernels: packed-fingerprint Tanimoto scans and
TF-IDF posting-list accumulation. Mirrors pykernels exactly."""

from libc.stdint cimport int32_t, int64_t, uint64_t

cdef extern from *:
    """
    static inline int rf_popcount64(unsigned long long x) {
    #if defined(__GNUC__) || defined(__clang__)
        return __builtin_popcountll(x);
    #else
        int c = 0;
        while (x) { x &= x - 1; c++; }
        return c;
    #endif
    }
    """
    int rf_popcount64(unsigned long long x) nogil


def tanimoto_block(const uint64_t[::1] query,
                   const uint64_t[:, ::1] docs,
                   double[::1] out):
    """Tanimoto of one packed fingerprint against a block of fingerprints."""
    cdef Py_ssize_t n = docs.shape[0]
    cdef Py_ssize_t w = docs.shape[1]
    cdef Py_ssize_t i, j
    cdef int64_t inter, union_
    cdef uint64_t q, d
    with nogil:
        for i in range(n):
            inter = 0
            union_ = 0
            for j in range(w):
                q = query[j]
                d = docs[i, j]
                inter += rf_popcount64(q & d)
                union_ += rf_popcount64(q | d)
            if union_ == 0:
                out[i] = 1.0
            else:
                out[i] = <double>inter / <double>union_


def tfidf_accumulate(const double[::1] term_weights,
                     const int64_t[::1] starts,
                     const int64_t[::1] ends,
                     const int32_t[::1] posting_docs,
                     const double[::1] posting_weights,
                     double[::1] scores):
    """Accumulate cosine contributions from an inverted index."""
    cdef Py_ssize_t t, j
    cdef int64_t lo, hi
    cdef double qw
    with nogil:
        for t in range(term_weights.shape[0]):
            lo = starts[t]
            hi = ends[t]
            qw = term_weights[t]
            for j in range(lo, hi):
                scores[posting_docs[j]] += qw * posting_weights[j]
