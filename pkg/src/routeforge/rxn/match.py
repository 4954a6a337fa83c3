"""Substructure matching: all injective embeddings of a Pattern.

Backtracking over a pattern traversal order in which every atom after the
first is adjacent to an already-placed atom, so candidates come from the
neighborhood of the partial embedding. Matching is monomorphic: molecule
bonds without a pattern counterpart are unconstrained.
"""

from __future__ import annotations

from routeforge.chem.mol import Molecule
from routeforge.rxn.smarts import Pattern


class Match:
    """One embedding: pattern atom i maps to molecule atom assignment[i]."""

    __slots__ = ("assignment", "slot")

    def __init__(self, assignment: tuple, slot: int = 0):
        self.assignment = assignment
        self.slot = slot

    def __eq__(self, other):
        return (isinstance(other, Match)
                and self.assignment == other.assignment
                and self.slot == other.slot)

    def __hash__(self):
        return hash((self.assignment, self.slot))

    def __repr__(self):
        return f"Match({self.assignment}, slot={self.slot})"


def _traversal_order(pattern: Pattern):
    """Atom order starting at 0; each later atom touches a placed one."""
    order = [0]
    placed = {0}
    frontier = [0]
    while len(order) < pattern.num_atoms:
        grew = False
        for a in frontier:
            for nbr, _ in pattern.adjacency[a]:
                if nbr not in placed:
                    placed.add(nbr)
                    order.append(nbr)
                    frontier.append(nbr)
                    grew = True
        if not grew:
            break  # unreachable for connected patterns
    return order


def _embeddings(pattern: Pattern, mol: Molecule, anchor=None,
                first_only=False):
    n_pat = pattern.num_atoms
    if mol.num_atoms < n_pat:
        return []
    order = _traversal_order(pattern)
    # For each traversal position, the pattern bonds to already-placed atoms.
    placed_before = {}
    seen = set()
    back_bonds = []
    for pos, p in enumerate(order):
        links = [(nbr, bond) for nbr, bond in pattern.adjacency[p]
                 if nbr in seen]
        back_bonds.append(links)
        placed_before[p] = pos
        seen.add(p)

    assignment = {}
    used = set()
    results = []

    def candidates(pos):
        p = order[pos]
        if pos == 0:
            if anchor is not None:
                return (anchor,)
            return range(mol.num_atoms)
        # Anchor search to the neighborhood of one placed pattern neighbor.
        nbr0, _ = back_bonds[pos][0]
        return tuple(m for m, _ in mol.neighbors(assignment[nbr0]))

    def extend(pos):
        if pos == n_pat:
            results.append(tuple(assignment[p] for p in range(n_pat)))
            return not first_only
        p = order[pos]
        expr = pattern.atoms[p].expr
        for m in candidates(pos):
            if m in used:
                continue
            if not expr.matches(mol, m):
                continue
            ok = True
            for nbr, pbond in back_bonds[pos]:
                mbond = mol.bond_between(assignment[nbr], m)
                if mbond is None or not pbond.expr.matches(mol, mbond):
                    ok = False
                    break
            if not ok:
                continue
            assignment[p] = m
            used.add(m)
            if not extend(pos + 1):
                del assignment[p]
                used.discard(m)
                return False
            del assignment[p]
            used.discard(m)
        return True

    extend(0)
    return results


def match_substructure(pattern: Pattern, mol: Molecule) -> list[Match]:
    """All distinct injective embeddings, sorted by assignment tuple."""
    found = _embeddings(pattern, mol)
    return [Match(t) for t in sorted(set(found))]


def has_substructure(pattern: Pattern, mol: Molecule) -> bool:
    return bool(_embeddings(pattern, mol, first_only=True))


def has_anchored_match(pattern: Pattern, mol: Molecule, atom_idx: int) -> bool:
    """Does the pattern embed with its first atom fixed to atom_idx?"""
    return bool(_embeddings(pattern, mol, anchor=atom_idx, first_only=True))
