"""Canonical SMILES generation.

Atom ranks come from iterative invariant refinement; remaining ties are
broken by branching over every member of the first ambiguous cell and
keeping the lexicographically smallest emitted string, which makes the
output independent of input atom order. The canonical form is internally
consistent (identical strings iff isomorphic graphs) rather than matching
any external toolkit.

Stereo annotations and atom maps are dropped from canonical output.
"""

from __future__ import annotations

from routeforge.chem.mol import (
    Molecule,
    NUM_TO_SYMBOL,
    ORGANIC_SUBSET,
    implied_hydrogens,
)


def canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES; isomorphic molecules map to one string."""
    if mol.num_atoms == 0:
        return ""
    pieces = [_canon_component(mol, comp) for comp in _components(mol)]
    return ".".join(sorted(pieces))


def _components(mol: Molecule):
    seen = [False] * mol.num_atoms
    comps = []
    for start in range(mol.num_atoms):
        if seen[start]:
            continue
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            a = stack.pop()
            comp.append(a)
            for nbr, _ in mol.neighbors(a):
                if not seen[nbr]:
                    seen[nbr] = True
                    stack.append(nbr)
        comps.append(comp)
    return comps


def _initial_invariants(mol: Molecule, comp):
    inv = {}
    for a in comp:
        atom = mol.atoms[a]
        inv[a] = (
            atom.element,
            mol.degree(a),
            atom.charge,
            atom.hydrogens,
            atom.aromatic,
            mol.ring_atom[a],
            atom.isotope or 0,
        )
    return inv


def _refine(mol: Molecule, comp, ranks):
    """Weisfeiler-Lehman style refinement until the partition stabilizes."""
    n_classes = len(set(ranks.values()))
    while True:
        keys = {}
        for a in comp:
            nbr_sig = sorted(
                (bond.bond_class, ranks[nbr]) for nbr, bond in mol.neighbors(a)
            )
            keys[a] = (ranks[a], tuple(nbr_sig))
        ordered = sorted(set(keys.values()))
        lookup = {key: i for i, key in enumerate(ordered)}
        ranks = {a: lookup[keys[a]] for a in comp}
        new_n = len(ordered)
        if new_n == n_classes:
            return ranks
        n_classes = new_n


def _signature(mol: Molecule, comp, ranks):
    """Complete invariant of the ranked graph: rankings with equal
    signatures emit identical SMILES."""
    order = sorted(comp, key=ranks.__getitem__)
    pos = {a: i for i, a in enumerate(order)}
    sig = []
    for a in order:
        atom = mol.atoms[a]
        nbrs = tuple(sorted(
            (pos[n], b.bond_class) for n, b in mol.neighbors(a)))
        sig.append((atom.element, atom.charge, atom.hydrogens,
                    atom.aromatic, atom.isotope or 0, nbrs))
    return tuple(sig)


def _canon_component(mol: Molecule, comp) -> str:
    inv = _initial_invariants(mol, comp)
    ordered = sorted(set(inv.values()))
    lookup = {key: i for i, key in enumerate(ordered)}
    ranks = {a: lookup[inv[a]] for a in comp}
    best: list = [None, None]  # signature, ranks

    def descend(ranks):
        ranks = _refine(mol, comp, ranks)
        # First cell with more than one member, by rank value.
        by_rank: dict[int, list] = {}
        for a in comp:
            by_rank.setdefault(ranks[a], []).append(a)
        tied = None
        for r in sorted(by_rank):
            if len(by_rank[r]) > 1:
                tied = by_rank[r]
                break
        if tied is None:
            sig = _signature(mol, comp, ranks)
            if best[0] is None or sig < best[0]:
                best[0] = sig
                best[1] = ranks
            return
        tied_rank = ranks[tied[0]]
        for chosen in tied:
            bumped = {
                a: 2 * ranks[a] + (1 if ranks[a] == tied_rank and a != chosen
                                   else 0)
                for a in comp
            }
            descend(bumped)

    descend(ranks)
    return _write_component(mol, comp, best[1])


# --------------------------------------------------------------------------
# Emission

def _bond_token(bond, atoms) -> str:
    if bond.aromatic:
        return ""
    if bond.order == 1:
        # A plain single bond between two aromatic atoms would read back as
        # aromatic inside rings; make it explicit.
        if atoms[bond.a].aromatic and atoms[bond.b].aromatic:
            return "-"
        return ""
    if bond.order == 2:
        return "="
    return "#"


def _atom_token(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    if atom.element == 0:
        return "*"
    sym = NUM_TO_SYMBOL[atom.element]
    plain = (
        atom.charge == 0
        and atom.isotope is None
        and sym in ORGANIC_SUBSET
    )
    if plain:
        if atom.aromatic:
            if atom.element == 6:
                arom_deg = sum(
                    1 for _, b in mol.neighbors(idx) if b.aromatic)
                extra = sum(
                    b.order for _, b in mol.neighbors(idx) if not b.aromatic)
                plain = atom.hydrogens == max(0, 3 - arom_deg - extra)
            else:
                plain = atom.hydrogens == 0
        else:
            total = sum(b.order for _, b in mol.neighbors(idx))
            plain = atom.hydrogens == implied_hydrogens(
                atom.element, 0, total)
    if plain:
        return sym.lower() if atom.aromatic else sym

    body = sym.lower() if atom.aromatic else sym
    if atom.isotope is not None:
        body = f"{atom.isotope}{body}"
    if atom.hydrogens == 1:
        body += "H"
    elif atom.hydrogens > 1:
        body += f"H{atom.hydrogens}"
    if atom.charge == 1:
        body += "+"
    elif atom.charge == -1:
        body += "-"
    elif atom.charge > 1:
        body += f"+{atom.charge}"
    elif atom.charge < -1:
        body += f"-{-atom.charge}"
    return f"[{body}]"


def _write_component(mol: Molecule, comp, ranks) -> str:
    start = min(comp, key=lambda a: ranks[a])

    # Spanning-tree DFS in rank order; non-tree edges become ring closures.
    tree_children = {a: [] for a in comp}
    closure_bonds = []
    visited = {start}
    order_pos = {start: 0}
    stack = [(start, iter(sorted(mol.neighbors(start),
                                 key=lambda nb: ranks[nb[0]])))]
    seen_bonds = set()
    while stack:
        node, it = stack[-1]
        advanced = False
        for nbr, bond in it:
            if id(bond) in seen_bonds:
                continue
            if nbr in visited:
                seen_bonds.add(id(bond))
                closure_bonds.append(bond)
                continue
            seen_bonds.add(id(bond))
            visited.add(nbr)
            order_pos[nbr] = len(order_pos)
            tree_children[node].append((nbr, bond))
            stack.append((nbr, iter(sorted(mol.neighbors(nbr),
                                           key=lambda nb: ranks[nb[0]]))))
            advanced = True
            break
        if not advanced:
            stack.pop()

    # Ring-closure digit bookkeeping: both endpoints list the bond; the
    # digit is allocated at the endpoint emitted first and freed when the
    # partner emits it.
    closures_at = {a: [] for a in comp}
    for bond in closure_bonds:
        closures_at[bond.a].append(bond)
        closures_at[bond.b].append(bond)
    for a in comp:
        closures_at[a].sort(key=lambda b: order_pos[b.other(a)])

    digit_of: dict[int, int] = {}
    free_digits = list(range(1, 100))
    out: list[str] = []

    def closure_token(atom_idx, bond):
        key = id(bond)
        if key in digit_of:
            digit = digit_of.pop(key)
            free_digits.append(digit)
            free_digits.sort()
            prefix = ""
        else:
            digit = free_digits.pop(0)
            digit_of[key] = digit
            prefix = _bond_token(bond, mol.atoms)
        return prefix + (str(digit) if digit < 10 else f"%{digit:02d}")

    def emit(node):
        out.append(_atom_token(mol, node))
        for bond in closures_at[node]:
            out.append(closure_token(node, bond))
        children = tree_children[node]
        for i, (child, bond) in enumerate(children):
            last = i == len(children) - 1
            token = _bond_token(bond, mol.atoms)
            if last:
                out.append(token)
                emit(child)
            else:
                out.append("(")
                out.append(token)
                emit(child)
                out.append(")")

    emit(start)
    return "".join(out)
