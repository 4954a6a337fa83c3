"""Circular (Morgan-style) fingerprints and Tanimoto similarity.

Environment identifiers are built with a pinned 64-bit mixer so that
fingerprints — and any index files containing them — are stable across
runs, platforms, and interpreter versions.
"""

from __future__ import annotations

import numpy as np

from routeforge.chem.mol import Molecule
from routeforge.errors import FingerprintWidthError

_M64 = (1 << 64) - 1
# Pinned seed for environment hashing; changing it invalidates index files.
HASH_SEED = 0x6A09E667F3BCC908


def _mix(x: int) -> int:
    """splitmix64 finalizer."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def hash_ints(values) -> int:
    """Stable 64-bit hash of an integer sequence."""
    h = HASH_SEED
    for v in values:
        h = _mix(h ^ (v & _M64))
    return h


class Fingerprint:
    """Fixed-width bitset packed into 64-bit words."""

    __slots__ = ("nbits", "radius", "words")

    def __init__(self, nbits: int, radius: int, words: tuple):
        self.nbits = nbits
        self.radius = radius
        self.words = words

    @classmethod
    def from_bits(cls, bits, nbits: int, radius: int) -> "Fingerprint":
        n_words = (nbits + 63) // 64
        words = [0] * n_words
        for bit in bits:
            words[bit >> 6] |= 1 << (bit & 63)
        return cls(nbits, radius, tuple(words))

    @property
    def bit_count(self) -> int:
        return sum(w.bit_count() for w in self.words)

    def bits(self):
        """Set bit positions, ascending."""
        out = []
        for wi, w in enumerate(self.words):
            base = wi << 6
            while w:
                low = w & -w
                out.append(base + low.bit_length() - 1)
                w ^= low
        return out

    def to_words_array(self) -> np.ndarray:
        return np.array(self.words, dtype=np.uint64)

    def __eq__(self, other):
        return (isinstance(other, Fingerprint)
                and self.nbits == other.nbits
                and self.words == other.words)

    def __hash__(self):
        return hash((self.nbits, self.words))

    def __repr__(self):
        return f"Fingerprint({self.nbits} bits, {self.bit_count} set)"


def atom_invariants(mol: Molecule):
    """Initial per-atom identifiers: element, degree, charge, attached H,
    ring membership."""
    out = []
    for i, atom in enumerate(mol.atoms):
        out.append(hash_ints((
            atom.element,
            mol.degree(i),
            atom.charge,
            atom.hydrogens,
            1 if mol.ring_atom[i] else 0,
        )))
    return out


def morgan_fingerprint(mol: Molecule, radius: int = 2,
                       nbits: int = 2048) -> Fingerprint:
    """Hash iteratively refined atom environments for radii 0..radius and
    fold them modulo nbits."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if nbits <= 0:
        raise ValueError("nbits must be positive")
    ids = atom_invariants(mol)
    bits = set()
    for v in ids:
        bits.add(v % nbits)
    for _ in range(radius):
        nxt = []
        for i in range(mol.num_atoms):
            env = sorted(
                (bond.bond_class, ids[nbr]) for nbr, bond in mol.neighbors(i)
            )
            flat = [ids[i]]
            for cls, nid in env:
                flat.append(cls)
                flat.append(nid)
            nxt.append(hash_ints(flat))
        ids = nxt
        for v in ids:
            bits.add(v % nbits)
    return Fingerprint.from_bits(bits, nbits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|A∩B| / |A∪B|; 1.0 when both bitsets are empty."""
    if a.nbits != b.nbits:
        raise FingerprintWidthError(
            f"fingerprint widths differ: {a.nbits} vs {b.nbits}")
    inter = 0
    union = 0
    for wa, wb in zip(a.words, b.words):
        inter += (wa & wb).bit_count()
        union += (wa | wb).bit_count()
    if union == 0:
        return 1.0
    return inter / union
