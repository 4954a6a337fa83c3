"""TF-IDF n-gram retrieval with exact cosine ranking.

Weighting is pinned so the brute-force oracle is well-defined:
TF = raw n-gram count in the document, IDF = ln((1 + N) / (1 + df)) + 1,
vectors L2-normalized. The vocabulary keeps at most the 1024 most frequent
bigrams/trigrams (ties broken lexicographically).
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from routeforge.index.tokenize import ngrams, tokenize_smiles
from routeforge.kernels import tfidf_accumulate

VOCAB_CAP = 1024


class NgramVocab:
    """Ordered n-gram vocabulary with inverse-document-frequency weights."""

    __slots__ = ("grams", "idf", "doc_count", "lookup")

    def __init__(self, grams, idf, doc_count):
        self.grams = grams
        self.idf = idf
        self.doc_count = doc_count
        self.lookup = {g: i for i, g in enumerate(grams)}

    def __len__(self):
        return len(self.grams)


def build_vocab(token_docs, cap: int = VOCAB_CAP) -> NgramVocab:
    """Top ``cap`` n-grams by total occurrence count, ties lexicographic."""
    counts: Counter = Counter()
    doc_freq: Counter = Counter()
    for tokens in token_docs:
        doc_grams = ngrams(tokens)
        counts.update(doc_grams)
        doc_freq.update(set(doc_grams))
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]
    grams = [g for g, _ in top]
    n_docs = len(token_docs)
    idf = [math.log((1 + n_docs) / (1 + doc_freq[g])) + 1.0 for g in grams]
    return NgramVocab(grams, idf, n_docs)


class TfIdfIndex:
    """Inverted index over one document collection.

    Documents are addressed by local position 0..N-1; the caller owns any
    mapping to external ids.
    """

    def __init__(self, vocab: NgramVocab, posting_starts, posting_docs,
                 posting_weights, doc_norms):
        self.vocab = vocab
        self.posting_starts = posting_starts    # int64[V + 1]
        self.posting_docs = posting_docs        # int32[P]
        self.posting_weights = posting_weights  # float64[P], L2-normalized
        self.doc_norms = doc_norms              # float64[N]

    @property
    def doc_count(self) -> int:
        return len(self.doc_norms)

    @classmethod
    def build(cls, texts, cap: int = VOCAB_CAP) -> "TfIdfIndex":
        token_docs = [tokenize_smiles(t) for t in texts]
        vocab = build_vocab(token_docs, cap)
        per_gram: list[list] = [[] for _ in range(len(vocab))]
        norms = np.zeros(len(texts), dtype=np.float64)
        for doc_id, tokens in enumerate(token_docs):
            tf = Counter(g for g in ngrams(tokens) if g in vocab.lookup)
            if not tf:
                continue
            weights = {g: count * vocab.idf[vocab.lookup[g]]
                       for g, count in tf.items()}
            norm = math.sqrt(sum(w * w for w in weights.values()))
            norms[doc_id] = norm
            for g, w in weights.items():
                per_gram[vocab.lookup[g]].append((doc_id, w / norm))
        starts = np.zeros(len(vocab) + 1, dtype=np.int64)
        docs = []
        weights_flat = []
        for gid, postings in enumerate(per_gram):
            postings.sort()
            starts[gid + 1] = starts[gid] + len(postings)
            for doc_id, w in postings:
                docs.append(doc_id)
                weights_flat.append(w)
        return cls(vocab,
                   starts,
                   np.array(docs, dtype=np.int32),
                   np.array(weights_flat, dtype=np.float64),
                   norms)

    def query_vector(self, text: str):
        """Normalized (gram id, weight) pairs for a query, sorted by id."""
        tf = Counter(g for g in ngrams(tokenize_smiles(text))
                     if g in self.vocab.lookup)
        if not tf:
            return []
        items = [(self.vocab.lookup[g], count * self.idf_of(g))
                 for g, count in tf.items()]
        norm = math.sqrt(sum(w * w for _, w in items))
        return sorted((gid, w / norm) for gid, w in items)

    def idf_of(self, gram) -> float:
        return self.vocab.idf[self.vocab.lookup[gram]]

    def query(self, text: str, k: int) -> list[tuple[int, float]]:
        """Top-k (doc id, cosine) by score desc then doc id asc; only
        documents sharing at least one vocabulary n-gram are returned."""
        if k < 1:
            raise ValueError("k must be >= 1")
        qvec = self.query_vector(text)
        if not qvec:
            return []
        gids = np.array([g for g, _ in qvec], dtype=np.int64)
        term_weights = np.array([w for _, w in qvec], dtype=np.float64)
        scores = np.zeros(self.doc_count, dtype=np.float64)
        tfidf_accumulate(term_weights,
                         self.posting_starts[gids],
                         self.posting_starts[gids + 1],
                         self.posting_docs, self.posting_weights, scores)
        hit_ids = np.nonzero(scores)[0]
        if len(hit_ids) == 0:
            return []
        order = np.lexsort((hit_ids, -scores[hit_ids]))[:k]
        return [(int(hit_ids[i]), float(scores[hit_ids[i]]))
                for i in order]
