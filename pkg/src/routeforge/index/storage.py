"""Versioned binary serialization of slot indexes.

Layout (little-endian throughout, documented in docs/formats.md):
magic "RFSX", format version u16, then header, members, fingerprint and
TF-IDF sections. Building the same library twice yields byte-identical
files; loads of truncated files raise IndexFormatError and version
mismatches raise IndexVersionError.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from routeforge.errors import IndexFormatError, IndexVersionError
from routeforge.index.fpindex import FpIndex
from routeforge.index.slot import SlotIndex
from routeforge.index.tfidf import NgramVocab, TfIdfIndex

MAGIC = b"RFSX"
FORMAT_VERSION = 1


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def raw(self, data: bytes):
        self.buf.write(data)

    def u8(self, v):
        self.buf.write(struct.pack("<B", v))

    def u16(self, v):
        self.buf.write(struct.pack("<H", v))

    def u32(self, v):
        self.buf.write(struct.pack("<I", v))

    def f64(self, v):
        self.buf.write(struct.pack("<d", v))

    def text(self, s: str):
        data = s.encode("utf-8")
        self.u32(len(data))
        self.buf.write(data)

    def getvalue(self):
        return self.buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError("truncated index file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self):
        return struct.unpack("<B", self.raw(1))[0]

    def u16(self):
        return struct.unpack("<H", self.raw(2))[0]

    def u32(self):
        return struct.unpack("<I", self.raw(4))[0]

    def f64(self):
        return struct.unpack("<d", self.raw(8))[0]

    def text(self) -> str:
        return self.raw(self.u32()).decode("utf-8")

    def done(self):
        if self.pos != len(self.data):
            raise IndexFormatError("trailing bytes in index file")


def dump_index(index: SlotIndex) -> bytes:
    w = _Writer()
    w.raw(MAGIC)
    w.u16(FORMAT_VERSION)
    w.text(index.template_id)
    w.u16(index.slot)
    n = index.member_count
    w.u32(n)
    for i in range(n):
        w.u32(index.member_doc_ids[i])
        w.text(index.entry_ids[i])
        w.text(index.canonicals[i])

    fp = index.fp
    w.u16(fp.nbits)
    w.u8(fp.radius)
    n_words = fp.words.shape[1]
    w.u8(n_words)
    w.raw(fp.words.astype("<u8").tobytes())

    tfidf = index.tfidf
    vocab = tfidf.vocab
    w.u32(vocab.doc_count)
    w.u32(len(vocab))
    for gram, idf in zip(vocab.grams, vocab.idf):
        w.u8(len(gram))
        for token in gram:
            w.text(token)
        w.f64(idf)
    w.u32(len(tfidf.posting_docs))
    for gid in range(len(vocab)):
        lo = int(tfidf.posting_starts[gid])
        hi = int(tfidf.posting_starts[gid + 1])
        w.u32(hi - lo)
        for j in range(lo, hi):
            w.u32(int(tfidf.posting_docs[j]))
            w.f64(float(tfidf.posting_weights[j]))
    for norm in tfidf.doc_norms:
        w.f64(float(norm))
    return w.getvalue()


def parse_index(data: bytes) -> SlotIndex:
    r = _Reader(data)
    if r.raw(4) != MAGIC:
        raise IndexFormatError("bad magic bytes")
    version = r.u16()
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"index format version {version}, expected {FORMAT_VERSION}")
    template_id = r.text()
    slot = r.u16()
    n = r.u32()
    member_doc_ids = []
    entry_ids = []
    canonicals = []
    for _ in range(n):
        member_doc_ids.append(r.u32())
        entry_ids.append(r.text())
        canonicals.append(r.text())

    nbits = r.u16()
    radius = r.u8()
    n_words = r.u8()
    words = np.frombuffer(r.raw(n * n_words * 8), dtype="<u8")
    words = words.reshape(n, n_words).astype(np.uint64)
    fp = FpIndex(words, nbits, radius)

    doc_count = r.u32()
    vocab_size = r.u32()
    grams = []
    idf = []
    for _ in range(vocab_size):
        gram_len = r.u8()
        grams.append(tuple(r.text() for _ in range(gram_len)))
        idf.append(r.f64())
    vocab = NgramVocab(grams, idf, doc_count)
    total_postings = r.u32()
    starts = np.zeros(vocab_size + 1, dtype=np.int64)
    docs = np.empty(total_postings, dtype=np.int32)
    weights = np.empty(total_postings, dtype=np.float64)
    cursor = 0
    for gid in range(vocab_size):
        count = r.u32()
        starts[gid + 1] = starts[gid] + count
        for _ in range(count):
            docs[cursor] = r.u32()
            weights[cursor] = r.f64()
            cursor += 1
    if cursor != total_postings:
        raise IndexFormatError("posting count mismatch")
    norms = np.array([r.f64() for _ in range(n)], dtype=np.float64)
    r.done()
    tfidf = TfIdfIndex(vocab, starts, docs, weights, norms)
    return SlotIndex(template_id, slot, member_doc_ids, entry_ids,
                     canonicals, tfidf, fp)


def save_index(index: SlotIndex, path) -> None:
    data = dump_index(index)
    with open(path, "wb") as fh:
        fh.write(data)


def load_index(path) -> SlotIndex:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IndexFormatError(f"cannot read index: {exc}") from exc
    return parse_index(data)
