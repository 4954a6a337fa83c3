"""Molecular framework extraction: ring systems plus their linkers.

Terminal side chains are pruned iteratively; freed valence on the atoms
that lose substituents is refilled with hydrogens. Acyclic molecules
reduce to the empty molecule, whose fingerprint is the empty bitset (so
two acyclic molecules compare as identical frameworks).
"""

from __future__ import annotations

from routeforge.chem.mol import Bond, Molecule, build_molecule, empty_molecule


def murcko_scaffold(mol: Molecule) -> Molecule:
    if not any(mol.ring_atom):
        return empty_molecule()

    keep = set(range(mol.num_atoms))
    while True:
        removable = [
            a for a in keep
            if not mol.ring_atom[a]
            and sum(1 for nbr, _ in mol.neighbors(a) if nbr in keep) <= 1
        ]
        if not removable:
            break
        keep.difference_update(removable)

    index = {a: i for i, a in enumerate(sorted(keep))}
    atoms = []
    for a in sorted(keep):
        atom = mol.atoms[a].copy()
        lost = sum(bond.order for nbr, bond in mol.neighbors(a)
                   if nbr not in keep)
        atom.hydrogens += lost
        atoms.append(atom)
    bonds = [
        Bond(index[b.a], index[b.b], b.order, b.aromatic, b.stereo)
        for b in mol.bonds
        if b.a in keep and b.b in keep
    ]
    return build_molecule(atoms, bonds)
