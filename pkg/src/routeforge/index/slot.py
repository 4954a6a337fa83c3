"""Per-(template, reactant-slot) retrieval over compatible building blocks.

Each slot index combines a TF-IDF n-gram retriever over canonical SMILES
with a Tanimoto retriever over 256-bit search fingerprints. Membership is
exactly the set of library entries matching the slot's reactant pattern,
so every candidate a query returns is substitutable into that slot.
"""

from __future__ import annotations

from routeforge.chem.fingerprint import morgan_fingerprint
from routeforge.chem.mol import Molecule, parse_smiles
from routeforge.errors import EmptySlotError, SmilesSyntaxError, ValenceError
from routeforge.index.fpindex import FpIndex
from routeforge.index.library import BB_FP_BITS, BB_FP_RADIUS, \
    BuildingBlockLibrary
from routeforge.index.tfidf import TfIdfIndex
from routeforge.rxn.template import ReactionTemplate, reactant_matches


class SlotIndex:
    """Retrieval structure for one (template, slot) pair.

    ``member_doc_ids[i]`` is the library position of local document i;
    query results are reported as library positions.
    """

    def __init__(self, template_id: str, slot: int, member_doc_ids,
                 entry_ids, canonicals, tfidf: TfIdfIndex, fp: FpIndex):
        self.template_id = template_id
        self.slot = slot
        self.member_doc_ids = member_doc_ids
        self.entry_ids = entry_ids
        self.canonicals = canonicals
        self.tfidf = tfidf
        self.fp = fp
        self._member_set = set(member_doc_ids)

    @property
    def member_count(self) -> int:
        return len(self.member_doc_ids)

    def is_member(self, doc_id: int) -> bool:
        return doc_id in self._member_set

    def __repr__(self):
        return (f"SlotIndex({self.template_id}/{self.slot}, "
                f"{self.member_count} members)")


def build_slot_index(library: BuildingBlockLibrary,
                     template: ReactionTemplate, slot: int) -> SlotIndex:
    """Filter compatible building blocks and build both retrievers."""
    if len(library) == 0:
        raise EmptySlotError("library is empty")
    members = [
        i for i, entry in enumerate(library)
        if reactant_matches(template, slot, entry.mol)
    ]
    if not members:
        raise EmptySlotError(
            f"no compatible building blocks for {template.id} slot {slot}")
    canonicals = [library[i].canonical_smiles for i in members]
    tfidf = TfIdfIndex.build(canonicals)
    fp = FpIndex.build([library[i].fingerprint for i in members])
    return SlotIndex(template.id, slot, members,
                     [library[i].id for i in members], canonicals, tfidf, fp)


def query_tfidf(index: SlotIndex, query_smiles: str,
                k: int) -> list[tuple[int, float]]:
    """Top-k members by n-gram cosine: (library doc id, score) pairs."""
    hits = index.tfidf.query(query_smiles, k)
    return [(index.member_doc_ids[local], score) for local, score in hits]


def query_fp(index: SlotIndex, query_mol: Molecule,
             k: int) -> list[tuple[int, float]]:
    """Top-k members by 256-bit Tanimoto: (library doc id, score) pairs."""
    fp = morgan_fingerprint(query_mol, BB_FP_RADIUS, BB_FP_BITS)
    hits = index.fp.query(fp, k)
    return [(index.member_doc_ids[local], score) for local, score in hits]


def combined_query(index: SlotIndex, query_smiles: str, k: int) -> list[int]:
    """Candidates from both retrievers, fingerprint hits first.

    Invalid query SMILES cannot be fingerprinted, so only the text-based
    retriever runs for them.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    try:
        query_mol = parse_smiles(query_smiles)
    except (SmilesSyntaxError, ValenceError):
        query_mol = None
    ordered: list[int] = []
    seen = set()
    if query_mol is not None:
        for doc_id, _ in query_fp(index, query_mol, k):
            if doc_id not in seen:
                seen.add(doc_id)
                ordered.append(doc_id)
    for doc_id, _ in query_tfidf(index, query_smiles, k):
        if doc_id not in seen:
            seen.add(doc_id)
            ordered.append(doc_id)
    return ordered
