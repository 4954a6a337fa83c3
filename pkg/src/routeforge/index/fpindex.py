"""Packed-fingerprint index with exact Tanimoto ranking."""

from __future__ import annotations

import numpy as np

from routeforge.chem.fingerprint import Fingerprint
from routeforge.errors import FingerprintWidthError
from routeforge.kernels import tanimoto_block


class FpIndex:
    """Fingerprints of one document collection, packed row-per-doc."""

    def __init__(self, words: np.ndarray, nbits: int, radius: int):
        self.words = words  # uint64[N, W]
        self.nbits = nbits
        self.radius = radius

    @property
    def doc_count(self) -> int:
        return self.words.shape[0]

    @classmethod
    def build(cls, fingerprints: list[Fingerprint]) -> "FpIndex":
        if not fingerprints:
            raise ValueError("no fingerprints")
        nbits = fingerprints[0].nbits
        radius = fingerprints[0].radius
        rows = []
        for fp in fingerprints:
            if fp.nbits != nbits:
                raise FingerprintWidthError("mixed widths in index")
            rows.append(fp.to_words_array())
        return cls(np.vstack(rows), nbits, radius)

    def query(self, fp: Fingerprint, k: int) -> list[tuple[int, float]]:
        """Top-k (doc id, Tanimoto) by score desc then doc id asc."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if fp.nbits != self.nbits:
            raise FingerprintWidthError(
                f"query width {fp.nbits} != index width {self.nbits}")
        scores = np.empty(self.doc_count, dtype=np.float64)
        tanimoto_block(fp.to_words_array(), self.words, scores)
        order = np.lexsort((np.arange(self.doc_count), -scores))[:k]
        return [(int(i), float(scores[i])) for i in order]
