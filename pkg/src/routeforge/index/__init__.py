"""Building-block retrieval: tokenization, TF-IDF and fingerprint
indexes, slot index construction and persistence."""

from routeforge.index.fpindex import FpIndex
from routeforge.index.library import (
    BB_FP_BITS,
    BB_FP_RADIUS,
    BuildingBlockLibrary,
    LibraryEntry,
)
from routeforge.index.slot import (
    SlotIndex,
    build_slot_index,
    combined_query,
    query_fp,
    query_tfidf,
)
from routeforge.index.storage import load_index, save_index
from routeforge.index.tfidf import VOCAB_CAP, NgramVocab, TfIdfIndex
from routeforge.index.tokenize import ngrams, tokenize_smiles

__all__ = [
    "BuildingBlockLibrary",
    "LibraryEntry",
    "BB_FP_BITS",
    "BB_FP_RADIUS",
    "NgramVocab",
    "TfIdfIndex",
    "FpIndex",
    "SlotIndex",
    "VOCAB_CAP",
    "tokenize_smiles",
    "ngrams",
    "build_slot_index",
    "query_tfidf",
    "query_fp",
    "combined_query",
    "save_index",
    "load_index",
]
