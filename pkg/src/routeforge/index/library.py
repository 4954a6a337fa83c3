"""Building-block library: parsed molecules plus search fingerprints.

File format: one SMILES per line with an optional tab-separated id;
'#' starts a comment. Every entry must parse and canonical SMILES must
be unique across the library.
"""

from __future__ import annotations

from routeforge.chem.fingerprint import Fingerprint, morgan_fingerprint
from routeforge.chem.mol import Molecule, parse_smiles

# Pinned search-fingerprint parameters for building-block retrieval.
BB_FP_BITS = 256
BB_FP_RADIUS = 2


class LibraryEntry:
    __slots__ = ("id", "smiles", "canonical_smiles", "mol", "fingerprint")

    def __init__(self, entry_id: str, smiles: str, canonical_smiles: str,
                 mol: Molecule, fingerprint: Fingerprint):
        self.id = entry_id
        self.smiles = smiles
        self.canonical_smiles = canonical_smiles
        self.mol = mol
        self.fingerprint = fingerprint

    def __repr__(self):
        return f"LibraryEntry({self.id}: {self.canonical_smiles})"


class BuildingBlockLibrary:
    def __init__(self, entries: list[LibraryEntry]):
        self.entries = entries
        self.canonical_index = {}
        for i, entry in enumerate(entries):
            if entry.canonical_smiles in self.canonical_index:
                raise ValueError(
                    f"duplicate building block {entry.canonical_smiles!r} "
                    f"(id {entry.id})")
            self.canonical_index[entry.canonical_smiles] = i

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> LibraryEntry:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def contains_canonical(self, canonical: str) -> bool:
        return canonical in self.canonical_index

    def lookup_canonical(self, canonical: str):
        """Entry index for a canonical SMILES, or None."""
        return self.canonical_index.get(canonical)

    @classmethod
    def from_smiles(cls, smiles_list, ids=None) -> "BuildingBlockLibrary":
        entries = []
        for i, smiles in enumerate(smiles_list):
            entry_id = ids[i] if ids else f"BB{i + 1:05d}"
            mol = parse_smiles(smiles)
            entries.append(LibraryEntry(
                entry_id, smiles, mol.canonical(), mol,
                morgan_fingerprint(mol, BB_FP_RADIUS, BB_FP_BITS)))
        return cls(entries)

    @classmethod
    def load(cls, path) -> "BuildingBlockLibrary":
        smiles_list = []
        ids = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                smiles_list.append(parts[0].strip())
                ids.append(parts[1].strip() if len(parts) > 1
                           else f"BB{lineno:05d}")
        return cls.from_smiles(smiles_list, ids)
