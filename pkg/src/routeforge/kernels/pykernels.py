"""Pure-Python (numpy) similarity kernels.

Fallback used when the compiled extension is unavailable. Both backends
perform the same arithmetic in the same order, so scores are bit-identical.
"""

from __future__ import annotations

import numpy as np


def tanimoto_block(query: np.ndarray, docs: np.ndarray,
                   out: np.ndarray) -> None:
    """Tanimoto of one packed fingerprint against a block of fingerprints.

    query: uint64[W]; docs: uint64[N, W]; out: float64[N].
    Empty-vs-empty pairs score 1.0.
    """
    inter = np.bitwise_count(docs & query).sum(axis=1, dtype=np.int64)
    pop_docs = np.bitwise_count(docs).sum(axis=1, dtype=np.int64)
    pop_query = int(np.bitwise_count(query).sum(dtype=np.int64))
    union = pop_docs + pop_query - inter
    np.divide(inter, union, out=out, where=union > 0)
    out[union == 0] = 1.0


def tfidf_accumulate(term_weights: np.ndarray, starts: np.ndarray,
                     ends: np.ndarray, posting_docs: np.ndarray,
                     posting_weights: np.ndarray,
                     scores: np.ndarray) -> None:
    """Accumulate cosine contributions from an inverted index.

    Query term t has weight term_weights[t] and postings in
    posting_docs/posting_weights[starts[t]:ends[t]]; each posting (doc, w)
    adds term_weights[t] * w to scores[doc].
    """
    for t in range(len(term_weights)):
        lo, hi = starts[t], ends[t]
        if lo == hi:
            continue
        docs = posting_docs[lo:hi]
        contrib = term_weights[t] * posting_weights[lo:hi]
        np.add.at(scores, docs, contrib)
