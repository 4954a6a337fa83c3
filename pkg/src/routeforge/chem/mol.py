"""Molecular graphs parsed from SMILES.

The parser covers the organic subset, bracket atoms, branches, ring
closures (including %nn), charges, isotopes, atom maps, and aromatic
lowercase notation. Aromaticity is taken as declared in the input; a
kekulization pass assigns alternating bond orders to validate valence
(no aromaticity perception is done). Stereo markers are kept as
annotations and ignored by all downstream semantics.
"""

from __future__ import annotations

from routeforge.errors import SmilesSyntaxError, ValenceError

_ELEMENTS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co "
    "Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb "
    "Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re "
    "Os Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es "
    "Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og"
).split()

SYMBOL_TO_NUM = {sym: i + 1 for i, sym in enumerate(_ELEMENTS)}
NUM_TO_SYMBOL = {i + 1: sym for i, sym in enumerate(_ELEMENTS)}

# Organic subset: atoms writable without brackets.
ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
# Elements that may carry the aromatic flag.
AROMATIC_ELEMENTS = {5, 6, 7, 8, 15, 16, 34}
_AROMATIC_SYMBOLS = {"b", "c", "n", "o", "p", "s", "se"}

# Default valences used for implicit-hydrogen assignment and validation.
_VALENCES = {
    5: (3,),          # B
    6: (4,),          # C
    7: (3, 5),        # N
    8: (2,),          # O
    9: (1,),          # F
    14: (4,),         # Si
    15: (3, 5),       # P
    16: (2, 4, 6),    # S
    17: (1,),         # Cl
    34: (2, 4, 6),    # Se
    35: (1,),         # Br
    52: (2, 4, 6),    # Te
    53: (1,),         # I
    33: (3, 5),       # As
}

BOND_SINGLE = 1
BOND_DOUBLE = 2
BOND_TRIPLE = 3
# Class label for aromatic bonds in hashing/matching contexts; the Bond
# itself carries a kekulized integer order plus an aromatic flag.
BOND_AROMATIC = 4


class Atom:
    """One heavy atom: element, aromaticity, charge, attached H count."""

    __slots__ = ("element", "aromatic", "charge", "hydrogens", "isotope",
                 "atom_map", "chirality")

    def __init__(self, element, aromatic=False, charge=0, hydrogens=0,
                 isotope=None, atom_map=0, chirality=None):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.hydrogens = hydrogens
        self.isotope = isotope
        self.atom_map = atom_map
        self.chirality = chirality  # annotation only

    def copy(self) -> "Atom":
        return Atom(self.element, self.aromatic, self.charge, self.hydrogens,
                    self.isotope, self.atom_map, self.chirality)

    @property
    def symbol(self) -> str:
        return NUM_TO_SYMBOL.get(self.element, "*")

    def __repr__(self):
        return (f"Atom({self.symbol}, arom={self.aromatic}, "
                f"chg={self.charge}, H={self.hydrogens})")


class Bond:
    """Edge between two atom indices.

    ``order`` is the integer (kekulized) order; ``aromatic`` marks bonds
    belonging to a declared aromatic system.
    """

    __slots__ = ("a", "b", "order", "aromatic", "stereo", "in_ring")

    def __init__(self, a, b, order=1, aromatic=False, stereo=None):
        self.a = a
        self.b = b
        self.order = order
        self.aromatic = aromatic
        self.stereo = stereo  # annotation only
        self.in_ring = False  # set during molecule finalization

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a

    @property
    def bond_class(self) -> int:
        """Order class used by matching/fingerprints: aromatic is its own kind."""
        return BOND_AROMATIC if self.aromatic else self.order

    def __repr__(self):
        mark = ":" if self.aromatic else str(self.order)
        return f"Bond({self.a}-{mark}-{self.b})"


class Molecule:
    """Immutable attributed molecular graph.

    Construct via :func:`parse_smiles` or :func:`build_molecule`; both
    run the same validation (bond sanity, kekulization, valence).
    """

    __slots__ = ("atoms", "bonds", "ring_atom", "ring_bond", "_adjacency",
                 "source_text", "_canonical")

    def __init__(self, atoms, bonds, ring_atom, ring_bond, adjacency,
                 source_text=None):
        self.atoms = atoms
        self.bonds = bonds
        self.ring_atom = ring_atom
        self.ring_bond = ring_bond
        self._adjacency = adjacency
        self.source_text = source_text
        self._canonical = None

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def neighbors(self, idx: int):
        """(neighbor index, bond) pairs for one atom."""
        return self._adjacency[idx]

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def bond_between(self, a: int, b: int):
        for nbr, bond in self._adjacency[a]:
            if nbr == b:
                return bond
        return None

    def canonical(self) -> str:
        """Canonical SMILES (cached)."""
        if self._canonical is None:
            from routeforge.chem.canon import canonical_smiles
            self._canonical = canonical_smiles(self)
        return self._canonical

    def __repr__(self):
        return f"Molecule({self.num_atoms} atoms, {len(self.bonds)} bonds)"


def empty_molecule() -> Molecule:
    """The zero-atom molecule (e.g. scaffold of an acyclic input)."""
    return Molecule((), (), (), (), ())


def allowed_valences(element: int, charge: int):
    """Charge-adjusted valence list, or None when unconstrained.

    Group 13 shifts down with positive charge, group 14 loses capacity
    with any charge, groups 15-17 shift with the charge sign.
    """
    base = _VALENCES.get(element)
    if base is None:
        return None
    if element in (5,):  # B
        adj = -charge
    elif element in (6, 14):  # C, Si
        adj = -abs(charge)
    else:
        adj = charge
    vals = tuple(v + adj for v in base if v + adj >= 0)
    return vals or (0,)


def implied_hydrogens(element: int, charge: int, bond_order_sum: int):
    """Implicit H count for an organic-subset atom, or None if impossible."""
    vals = allowed_valences(element, charge)
    if vals is None:
        return 0
    for v in sorted(vals):
        if v >= bond_order_sum:
            return v - bond_order_sum
    return None


# --------------------------------------------------------------------------
# Ring perception: a bond is in a ring iff it is not a bridge.

def _ring_flags(n_atoms, bonds):
    if not bonds:
        return [False] * n_atoms, []
    adjacency = [[] for _ in range(n_atoms)]
    for idx, bond in enumerate(bonds):
        adjacency[bond.a].append((bond.b, idx))
        adjacency[bond.b].append((bond.a, idx))
    ring_bond = [True] * len(bonds)
    disc = [-1] * n_atoms
    low = [0] * n_atoms
    timer = 0
    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        # Iterative Tarjan bridge finding.
        stack = [(root, -1, iter(adjacency[root]))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            node, parent_bond, it = stack[-1]
            advanced = False
            for nbr, bond_idx in it:
                if bond_idx == parent_bond:
                    continue
                if disc[nbr] == -1:
                    disc[nbr] = low[nbr] = timer
                    timer += 1
                    stack.append((nbr, bond_idx, iter(adjacency[nbr])))
                    advanced = True
                    break
                low[node] = min(low[node], disc[nbr])
            if not advanced:
                stack.pop()
                if stack:
                    pnode = stack[-1][0]
                    low[pnode] = min(low[pnode], low[node])
                    if low[node] > disc[pnode]:
                        ring_bond[parent_bond] = False  # bridge
    ring_atom = [False] * n_atoms
    for i, bond in enumerate(bonds):
        if ring_bond[i]:
            ring_atom[bond.a] = True
            ring_atom[bond.b] = True
    return ring_atom, ring_bond


# --------------------------------------------------------------------------
# Kekulization: assign alternating double bonds within declared aromatic
# systems so valences can be validated. Aromatic atoms are classified by
# whether they must, may, or cannot carry one double bond.

_PI_NEVER, _PI_MUST, _PI_MAY = 0, 1, 2


def _pi_class(atom: Atom, has_exo_multiple: bool) -> int:
    if has_exo_multiple:
        return _PI_NEVER  # pi electron already committed outside the ring
    el, chg = atom.element, atom.charge
    if el == 6:
        return _PI_MUST if chg == 0 else _PI_MAY
    if el in (7, 15, 33):
        if chg > 0:
            return _PI_MUST
        if chg < 0:
            return _PI_NEVER
        return _PI_NEVER if (atom.hydrogens > 0) else _PI_MUST
    if el in (8, 16, 34, 52):
        return _PI_MUST if chg > 0 else _PI_NEVER
    if el == 5:
        return _PI_MAY
    return _PI_MAY


def _kekulize(atoms, bonds, adjacency):
    """Pick kekulé orders for aromatic bonds; raise ValenceError on failure.

    Returns a dict bond_index -> order (1 or 2) for aromatic bonds.
    """
    arom_atoms = [i for i, a in enumerate(atoms) if a.aromatic]
    if not arom_atoms:
        return {}
    # Degree-3 aromatic nitrogen-likes donate the lone pair.
    exo_multiple = {}
    arom_degree = {}
    for i in arom_atoms:
        exo = False
        deg = 0
        for _, bond in adjacency[i]:
            if bond.aromatic:
                deg += 1
            elif bond.order >= 2:
                exo = True
        exo_multiple[i] = exo
        arom_degree[i] = deg

    classes = {}
    for i in arom_atoms:
        atom = atoms[i]
        cls = _pi_class(atom, exo_multiple[i])
        # A trisubstituted neutral N/P donates its lone pair instead.
        if cls == _PI_MUST and atom.element in (7, 15, 33) and atom.charge == 0:
            if len(adjacency[i]) + atom.hydrogens >= 3:
                cls = _PI_NEVER
        classes[i] = cls

    must = [i for i in arom_atoms if classes[i] == _PI_MUST]
    # Backtracking perfect matching over aromatic bonds covering all MUST
    # atoms; aromatic systems are small so this stays cheap.
    matched = {}

    arom_nbrs = {
        i: [(nbr, bond) for nbr, bond in adjacency[i]
            if bond.aromatic and classes.get(nbr, _PI_NEVER) != _PI_NEVER]
        for i in arom_atoms
    }

    def extend(k: int) -> bool:
        while k < len(must) and must[k] in matched:
            k += 1
        if k == len(must):
            return True
        i = must[k]
        for nbr, bond in arom_nbrs[i]:
            if nbr in matched:
                continue
            matched[i] = nbr
            matched[nbr] = i
            if extend(k + 1):
                return True
            del matched[i]
            del matched[nbr]
        return False

    if not extend(0):
        raise ValenceError("aromatic system cannot be kekulized")

    orders = {}
    seen_pairs = set()
    for idx, bond in enumerate(bonds):
        if not bond.aromatic:
            continue
        pair_matched = matched.get(bond.a) == bond.b
        if pair_matched and (bond.a, bond.b) not in seen_pairs:
            orders[idx] = 2
            seen_pairs.add((bond.a, bond.b))
            seen_pairs.add((bond.b, bond.a))
        else:
            orders[idx] = 1
    return orders


def build_molecule(atoms, bonds, source_text=None) -> Molecule:
    """Finalize and validate a molecular graph.

    Shared by the parser, scaffold extraction, and template application so
    every Molecule in the system satisfies the same invariants.
    """
    n = len(atoms)
    seen_pairs = set()
    for bond in bonds:
        if not (0 <= bond.a < n and 0 <= bond.b < n):
            raise SmilesSyntaxError("bond references missing atom")
        if bond.a == bond.b:
            raise SmilesSyntaxError("self-bond")
        key = (min(bond.a, bond.b), max(bond.a, bond.b))
        if key in seen_pairs:
            raise SmilesSyntaxError("duplicate bond between atom pair")
        seen_pairs.add(key)

    adjacency = [[] for _ in range(n)]
    for bond in bonds:
        adjacency[bond.a].append((bond.b, bond))
        adjacency[bond.b].append((bond.a, bond))

    ring_atom, ring_bond = _ring_flags(n, bonds)
    for i, bond in enumerate(bonds):
        bond.in_ring = ring_bond[i]

    for i, bond in enumerate(bonds):
        if bond.aromatic:
            if not (atoms[bond.a].aromatic and atoms[bond.b].aromatic):
                raise ValenceError("aromatic bond on non-aromatic atom")
            if not ring_bond[i]:
                raise ValenceError("aromatic bond outside a ring")

    for i, atom in enumerate(atoms):
        if atom.aromatic:
            if atom.element not in AROMATIC_ELEMENTS:
                raise ValenceError(
                    f"element {atom.symbol} cannot be aromatic")
            if not ring_atom[i]:
                raise ValenceError("aromatic atom outside a ring")
        if atom.hydrogens < 0:
            raise ValenceError("negative hydrogen count")
        if not (1 <= atom.element <= 118) and atom.element != 0:
            raise SmilesSyntaxError(f"bad atomic number {atom.element}")
        if not (-4 <= atom.charge <= 4):
            raise ValenceError(f"charge {atom.charge} out of range")

    kek = _kekulize(atoms, bonds, adjacency)
    for idx, order in kek.items():
        bonds[idx].order = order

    # Valence validation with kekulized orders.
    for i, atom in enumerate(atoms):
        if atom.element == 0:
            continue
        vals = allowed_valences(atom.element, atom.charge)
        if vals is None:
            continue
        total = sum(b.order for _, b in adjacency[i]) + atom.hydrogens
        if total > max(vals):
            raise ValenceError(
                f"atom {i} ({atom.symbol}) exceeds valence: {total}")

    return Molecule(
        tuple(atoms), tuple(bonds), tuple(ring_atom), tuple(ring_bond),
        tuple(tuple(nbrs) for nbrs in adjacency), source_text)


# --------------------------------------------------------------------------
# SMILES parsing

def _parse_bracket_atom(text: str, pos: int):
    """Parse the inside of [...] starting after '['; returns (Atom, end)."""
    end = text.find("]", pos)
    if end < 0:
        raise SmilesSyntaxError("unclosed bracket atom")
    body = text[pos:end]
    if not body:
        raise SmilesSyntaxError("empty bracket atom")
    i = 0
    isotope = None
    if body[i].isdigit():
        j = i
        while j < len(body) and body[j].isdigit():
            j += 1
        isotope = int(body[i:j])
        i = j
    if i >= len(body):
        raise SmilesSyntaxError(f"bracket atom missing element: [{body}]")

    aromatic = False
    if body.startswith("se", i):
        element, aromatic, i = 34, True, i + 2
    elif body[i] == "*":
        element, i = 0, i + 1
    elif body[i].islower():
        sym = body[i]
        if sym not in _AROMATIC_SYMBOLS:
            raise SmilesSyntaxError(f"unknown aromatic symbol {sym!r}")
        element, aromatic, i = SYMBOL_TO_NUM[sym.upper()], True, i + 1
    else:
        sym = body[i]
        if i + 1 < len(body) and body[i + 1].islower() \
                and sym + body[i + 1] in SYMBOL_TO_NUM:
            sym = sym + body[i + 1]
            i += 2
        elif sym in SYMBOL_TO_NUM:
            i += 1
        else:
            raise SmilesSyntaxError(f"unknown element {sym!r}")
        element = SYMBOL_TO_NUM[sym]

    chirality = None
    if i < len(body) and body[i] == "@":
        if i + 1 < len(body) and body[i + 1] == "@":
            chirality, i = "@@", i + 2
        else:
            chirality, i = "@", i + 1

    hydrogens = 0
    if i < len(body) and body[i] == "H":
        i += 1
        j = i
        while j < len(body) and body[j].isdigit():
            j += 1
        hydrogens = int(body[i:j]) if j > i else 1
        i = j

    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        run = 1
        i += 1
        while i < len(body) and body[i] == body[i - 1]:
            run += 1
            i += 1
        if i < len(body) and body[i].isdigit():
            j = i
            while j < len(body) and body[j].isdigit():
                j += 1
            charge = sign * int(body[i:j])
            i = j
        else:
            charge = sign * run

    atom_map = 0
    if i < len(body) and body[i] == ":":
        j = i + 1
        while j < len(body) and body[j].isdigit():
            j += 1
        if j == i + 1:
            raise SmilesSyntaxError("atom map missing digits")
        atom_map = int(body[i + 1:j])
        i = j

    if i != len(body):
        raise SmilesSyntaxError(f"trailing junk in bracket atom: [{body}]")
    return Atom(element, aromatic, charge, hydrogens, isotope, atom_map,
                chirality), end + 1


_BOND_CHARS = {"-": 1, "=": 2, "#": 3, ":": -1}  # -1: aromatic


def parse_smiles(text: str) -> Molecule:
    """Parse SMILES text into a validated Molecule.

    Raises SmilesSyntaxError for malformed input and ValenceError for
    chemically impossible atoms or unkekulizable aromatic systems.
    """
    if not isinstance(text, str) or not text.strip():
        raise SmilesSyntaxError("empty SMILES")
    text = text.strip()

    atoms: list[Atom] = []
    bracketed: list[bool] = []
    bonds: list[Bond] = []
    prev = None            # anchor atom index
    pending = None         # (order, aromatic, stereo) for the next bond
    branch_stack: list = []
    open_rings: dict = {}  # number -> (atom index, pending bond or None)

    def add_bond(a, b, spec):
        if spec is None:
            order, aromatic = 1, None  # resolve aromatic default later
            stereo = None
        else:
            order, aromatic, stereo = spec
        bonds.append(Bond(a, b, order, aromatic, stereo))

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            atom, i = _parse_bracket_atom(text, i + 1)
            atoms.append(atom)
            bracketed.append(True)
        elif ch in "%0123456789":
            if prev is None:
                raise SmilesSyntaxError("ring closure before any atom")
            if ch == "%":
                if i + 2 >= n or not text[i + 1:i + 3].isdigit():
                    raise SmilesSyntaxError("%% ring closure needs two digits")
                num = int(text[i + 1:i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in open_rings:
                other, other_pending = open_rings.pop(num)
                if other == prev:
                    raise SmilesSyntaxError("ring closure to same atom")
                spec = pending if pending is not None else other_pending
                if pending is not None and other_pending is not None \
                        and pending[:2] != other_pending[:2]:
                    raise SmilesSyntaxError(
                        f"conflicting ring-bond orders for closure {num}")
                add_bond(other, prev, spec)
                pending = None
            else:
                open_rings[num] = (prev, pending)
                pending = None
            continue
        elif ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch before any atom")
            branch_stack.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unbalanced ')'")
            prev = branch_stack.pop()
            i += 1
            continue
        elif ch in _BOND_CHARS:
            if pending is not None:
                raise SmilesSyntaxError("two bond symbols in a row")
            code = _BOND_CHARS[ch]
            pending = (1, True, None) if code == -1 else (code, False, None)
            i += 1
            continue
        elif ch in "/\\":
            if pending is not None:
                raise SmilesSyntaxError("two bond symbols in a row")
            pending = (1, False, ch)
            i += 1
            continue
        elif ch == ".":
            if pending is not None:
                raise SmilesSyntaxError("bond before '.'")
            prev = None
            i += 1
            continue
        elif ch == "*":
            atoms.append(Atom(0))
            bracketed.append(False)
            i += 1
            idx = len(atoms) - 1
            if prev is not None:
                add_bond(prev, idx, pending)
                pending = None
            prev = idx
            continue
        elif ch.isalpha():
            two = text[i:i + 2]
            if two in ("Cl", "Br"):
                sym, i = two, i + 2
            elif ch.upper() in ORGANIC_SUBSET and len(ch) == 1 \
                    and (ch.isupper() or ch in "bcnops"):
                sym, i = ch, i + 1
            else:
                raise SmilesSyntaxError(f"unknown token {ch!r} at {i}")
            aromatic = sym.islower()
            atoms.append(Atom(SYMBOL_TO_NUM[sym.capitalize()],
                              aromatic=aromatic))
            bracketed.append(False)
        else:
            raise SmilesSyntaxError(f"unknown character {ch!r} at {i}")

        # Common tail for atom tokens parsed above (bracket or organic).
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending)
            pending = None
        elif pending is not None:
            raise SmilesSyntaxError("dangling bond symbol")
        prev = idx

    if branch_stack:
        raise SmilesSyntaxError("unbalanced '('")
    if open_rings:
        raise SmilesSyntaxError(f"unclosed ring closures: {sorted(open_rings)}")
    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol at end")
    if not atoms:
        raise SmilesSyntaxError("no atoms")

    _resolve_default_bonds(atoms, bonds)
    _assign_implicit_hydrogens(atoms, bonds, bracketed)
    return build_molecule(atoms, bonds, source_text=text)


def _resolve_default_bonds(atoms, bonds):
    """Unspecified bonds become aromatic between two aromatic atoms when the
    bond sits in a ring, single otherwise (e.g. the biphenyl junction)."""
    _, ring_bond = _ring_flags(len(atoms), bonds)
    for i, bond in enumerate(bonds):
        if bond.aromatic is None:
            bond.aromatic = (atoms[bond.a].aromatic
                             and atoms[bond.b].aromatic
                             and ring_bond[i])
        if bond.aromatic:
            bond.order = 1  # kekulization decides 1 vs 2


def _assign_implicit_hydrogens(atoms, bonds, bracketed):
    """Organic-subset atoms written without brackets get standard implicit
    hydrogens; bracket atoms keep exactly what the brackets said."""
    order_sum = [0] * len(atoms)
    arom_deg = [0] * len(atoms)
    deg = [0] * len(atoms)
    for bond in bonds:
        for end in (bond.a, bond.b):
            deg[end] += 1
            if bond.aromatic:
                arom_deg[end] += 1
            else:
                order_sum[end] += bond.order
    for i, atom in enumerate(atoms):
        if bracketed[i]:
            continue
        if atom.element == 0:
            continue
        if atom.aromatic:
            # One sigma per bond plus one pi: an unbracketed aromatic carbon
            # always takes a double bond in any kekulé assignment. Other
            # unbracketed aromatic elements carry no implicit hydrogens
            # (pyrrole-type NH must be written [nH]).
            if atom.element == 6:
                h = 3 - arom_deg[i] - order_sum[i]
            else:
                h = 0
            atom.hydrogens = max(0, h)
        else:
            h = implied_hydrogens(atom.element, atom.charge, order_sum[i])
            if h is None:
                raise ValenceError(
                    f"atom {i} ({atom.symbol}) bond order sum {order_sum[i]} "
                    "exceeds every allowed valence")
            atom.hydrogens = h


# --------------------------------------------------------------------------
# Utilities used across modules and tests

def permute_molecule(mol: Molecule, perm) -> Molecule:
    """Rebuild a molecule with atom i moved to position perm[i]."""
    n = mol.num_atoms
    if sorted(perm) != list(range(n)):
        raise ValueError("not a permutation")
    atoms = [None] * n
    for i, atom in enumerate(mol.atoms):
        atoms[perm[i]] = atom.copy()
    bonds = [Bond(perm[b.a], perm[b.b], b.order, b.aromatic, b.stereo)
             for b in mol.bonds]
    return build_molecule(atoms, bonds, source_text=mol.source_text)


def molecules_isomorphic(a: Molecule, b: Molecule) -> bool:
    """Graph equality up to atom order, via canonical form."""
    return a.canonical() == b.canonical()
