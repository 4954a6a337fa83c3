"""Chemical substrate: SMILES graphs, canonicalization, fingerprints,
frameworks, similarity."""

from routeforge.chem.canon import canonical_smiles
from routeforge.chem.fingerprint import (
    Fingerprint,
    morgan_fingerprint,
    tanimoto,
)
from routeforge.chem.mol import (
    Atom,
    Bond,
    Molecule,
    build_molecule,
    empty_molecule,
    molecules_isomorphic,
    parse_smiles,
    permute_molecule,
)
from routeforge.chem.scaffold import murcko_scaffold

__all__ = [
    "Atom",
    "Bond",
    "Molecule",
    "Fingerprint",
    "parse_smiles",
    "canonical_smiles",
    "build_molecule",
    "empty_molecule",
    "morgan_fingerprint",
    "tanimoto",
    "murcko_scaffold",
    "permute_molecule",
    "molecules_isomorphic",
]
