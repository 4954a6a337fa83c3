"""SMARTS pattern parsing.

Supported subset: element primitives ([C], c, [N+], [#7]), wildcard *,
aromatic/aliphatic classes a/A, degree D, total-H H, connectivity X,
ring membership R/R0, charges, isotopes, logical operators ! & , ; with
standard precedence, recursive environments $(...), bond primitives
- = # : ~ @ with the same logical operators, branches, ring closures and
atom maps. Anything else is rejected at parse time with the offending
token rather than silently mismatching.
"""

from __future__ import annotations

from routeforge.chem.mol import SYMBOL_TO_NUM, Molecule
from routeforge.errors import SmartsSyntaxError, UnsupportedFeatureError

_AROMATIC_SMARTS = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
_TWO_LETTER_ORGANIC = ("Cl", "Br")


# --------------------------------------------------------------------------
# Atom expressions

class AtomExpr:
    __slots__ = ()

    def matches(self, mol: Molecule, idx: int) -> bool:
        raise NotImplementedError


class AnyAtom(AtomExpr):
    __slots__ = ()

    def matches(self, mol, idx):
        return True

    def __repr__(self):
        return "*"


class AromClass(AtomExpr):
    __slots__ = ("aromatic",)

    def __init__(self, aromatic: bool):
        self.aromatic = aromatic

    def matches(self, mol, idx):
        return mol.atoms[idx].aromatic == self.aromatic

    def __repr__(self):
        return "a" if self.aromatic else "A"


class ElementIs(AtomExpr):
    __slots__ = ("element", "aromatic")

    def __init__(self, element: int, aromatic):
        self.element = element
        self.aromatic = aromatic  # None: either

    def matches(self, mol, idx):
        atom = mol.atoms[idx]
        if atom.element != self.element:
            return False
        return self.aromatic is None or atom.aromatic == self.aromatic

    def __repr__(self):
        return f"#{self.element}" + ("" if self.aromatic is None
                                     else ("ar" if self.aromatic else "al"))


class ChargeIs(AtomExpr):
    __slots__ = ("charge",)

    def __init__(self, charge: int):
        self.charge = charge

    def matches(self, mol, idx):
        return mol.atoms[idx].charge == self.charge

    def __repr__(self):
        return f"{self.charge:+d}"


class TotalHIs(AtomExpr):
    __slots__ = ("count",)

    def __init__(self, count: int):
        self.count = count

    def matches(self, mol, idx):
        return mol.atoms[idx].hydrogens == self.count

    def __repr__(self):
        return f"H{self.count}"


class DegreeIs(AtomExpr):
    __slots__ = ("count",)

    def __init__(self, count: int):
        self.count = count

    def matches(self, mol, idx):
        return mol.degree(idx) == self.count

    def __repr__(self):
        return f"D{self.count}"


class ConnectivityIs(AtomExpr):
    __slots__ = ("count",)

    def __init__(self, count: int):
        self.count = count

    def matches(self, mol, idx):
        return mol.degree(idx) + mol.atoms[idx].hydrogens == self.count

    def __repr__(self):
        return f"X{self.count}"


class InRing(AtomExpr):
    __slots__ = ("flag",)

    def __init__(self, flag: bool):
        self.flag = flag

    def matches(self, mol, idx):
        return mol.ring_atom[idx] == self.flag

    def __repr__(self):
        return "R" if self.flag else "R0"


class IsotopeIs(AtomExpr):
    __slots__ = ("isotope",)

    def __init__(self, isotope: int):
        self.isotope = isotope

    def matches(self, mol, idx):
        return (mol.atoms[idx].isotope or 0) == self.isotope

    def __repr__(self):
        return f"{self.isotope}*"


class Recursive(AtomExpr):
    """$(...): the atom matches iff the sub-pattern embeds with its first
    atom anchored here."""

    __slots__ = ("pattern",)

    def __init__(self, pattern):
        self.pattern = pattern

    def matches(self, mol, idx):
        from routeforge.rxn.match import has_anchored_match
        return has_anchored_match(self.pattern, mol, idx)

    def __repr__(self):
        return f"$({self.pattern.smarts_text})"


class NotExpr(AtomExpr):
    __slots__ = ("inner",)

    def __init__(self, inner):
        self.inner = inner

    def matches(self, mol, idx):
        return not self.inner.matches(mol, idx)

    def __repr__(self):
        return f"!{self.inner!r}"


class AndExpr(AtomExpr):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = parts

    def matches(self, mol, idx):
        return all(p.matches(mol, idx) for p in self.parts)

    def __repr__(self):
        return "&".join(repr(p) for p in self.parts)


class OrExpr(AtomExpr):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = parts

    def matches(self, mol, idx):
        return any(p.matches(mol, idx) for p in self.parts)

    def __repr__(self):
        return ",".join(repr(p) for p in self.parts)


# --------------------------------------------------------------------------
# Bond expressions

class BondExpr:
    __slots__ = ()

    def matches(self, mol, bond) -> bool:
        raise NotImplementedError


class BondAny(BondExpr):
    __slots__ = ()

    def matches(self, mol, bond):
        return True


class BondOrderIs(BondExpr):
    __slots__ = ("order",)

    def __init__(self, order: int):
        self.order = order

    def matches(self, mol, bond):
        return not bond.aromatic and bond.order == self.order


class BondAromatic(BondExpr):
    __slots__ = ()

    def matches(self, mol, bond):
        return bond.aromatic


class BondInRing(BondExpr):
    __slots__ = ()

    def matches(self, mol, bond):
        return bond.in_ring


class BondDefault(BondExpr):
    """Unwritten bond: single or aromatic."""

    __slots__ = ()

    def matches(self, mol, bond):
        return bond.aromatic or bond.order == 1


class BondNot(BondExpr):
    __slots__ = ("inner",)

    def __init__(self, inner):
        self.inner = inner

    def matches(self, mol, bond):
        return not self.inner.matches(mol, bond)


class BondAnd(BondExpr):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = parts

    def matches(self, mol, bond):
        return all(p.matches(mol, bond) for p in self.parts)


class BondOr(BondExpr):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = parts

    def matches(self, mol, bond):
        return any(p.matches(mol, bond) for p in self.parts)


# --------------------------------------------------------------------------
# Pattern graph

class PatternAtom:
    __slots__ = ("expr", "atom_map")

    def __init__(self, expr: AtomExpr, atom_map: int = 0):
        self.expr = expr
        self.atom_map = atom_map


class PatternBond:
    __slots__ = ("a", "b", "expr")

    def __init__(self, a: int, b: int, expr: BondExpr):
        self.a = a
        self.b = b
        self.expr = expr


class Pattern:
    """Connected pattern graph with per-atom predicates and maps."""

    __slots__ = ("atoms", "bonds", "adjacency", "smarts_text")

    def __init__(self, atoms, bonds, smarts_text):
        self.atoms = atoms
        self.bonds = bonds
        self.smarts_text = smarts_text
        adjacency = [[] for _ in atoms]
        for bond in bonds:
            adjacency[bond.a].append((bond.b, bond))
            adjacency[bond.b].append((bond.a, bond))
        self.adjacency = adjacency

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def atom_maps(self):
        return [a.atom_map for a in self.atoms]

    def __repr__(self):
        return f"Pattern({self.smarts_text!r})"


# --------------------------------------------------------------------------
# Parser

class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self):
        ch = self.peek()
        self.pos += 1
        return ch

    def digits(self, default=None):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            return default
        return int(self.text[start:self.pos])


def _parse_bracket_expr(sc: _Scanner):
    """Parse one [...] body into (AtomExpr, atom_map)."""

    atom_map = [0]

    def primitive():
        ch = sc.peek()
        if ch == "":
            raise SmartsSyntaxError("unterminated bracket expression")
        if ch.isdigit():
            return IsotopeIs(sc.digits())
        if ch == "#":
            sc.take()
            num = sc.digits()
            if num is None:
                raise SmartsSyntaxError("'#' needs an atomic number")
            return ElementIs(num, None)
        if ch == "*":
            sc.take()
            return AnyAtom()
        if ch == "$":
            sc.take()
            if sc.take() != "(":
                raise SmartsSyntaxError("'$' must be followed by '('")
            depth = 1
            start = sc.pos
            while depth:
                c = sc.take()
                if c == "":
                    raise SmartsSyntaxError("unterminated recursive pattern")
                if c == "(":
                    depth += 1
                elif c == ")":
                    depth -= 1
            inner = sc.text[start:sc.pos - 1]
            return Recursive(parse_smarts(inner))
        if ch == "+" or ch == "-":
            sign = 1 if ch == "+" else -1
            sc.take()
            run = 1
            while sc.peek() == ch:
                sc.take()
                run += 1
            num = sc.digits()
            return ChargeIs(sign * (num if num is not None else run))
        if ch == "@":
            # Chirality annotations are ignored by matching: always-true.
            sc.take()
            if sc.peek() == "@":
                sc.take()
            return AnyAtom()
        if ch == "H":
            sc.take()
            return TotalHIs(sc.digits(default=1))
        if ch == "D":
            sc.take()
            return DegreeIs(sc.digits(default=1))
        if ch == "X":
            sc.take()
            return ConnectivityIs(sc.digits(default=1))
        if ch == "R":
            sc.take()
            num = sc.digits()
            if num is None:
                return InRing(True)
            if num == 0:
                return InRing(False)
            raise UnsupportedFeatureError(f"R{num}")
        if ch in ("r", "v", "x", "h"):
            raise UnsupportedFeatureError(ch)
        if ch == "a":
            sc.take()
            return AromClass(True)
        if ch == "A":
            sc.take()
            return AromClass(False)
        if sc.text.startswith("se", sc.pos):
            sc.pos += 2
            return ElementIs(34, True)
        if ch in _AROMATIC_SMARTS:
            sc.take()
            return ElementIs(_AROMATIC_SMARTS[ch], True)
        if ch.isupper():
            two = sc.text[sc.pos:sc.pos + 2]
            if len(two) == 2 and two[1].islower() and two in SYMBOL_TO_NUM:
                sc.pos += 2
                return ElementIs(SYMBOL_TO_NUM[two], False)
            if ch in SYMBOL_TO_NUM:
                sc.take()
                return ElementIs(SYMBOL_TO_NUM[ch], False)
        raise SmartsSyntaxError(f"unknown atom primitive {ch!r}")

    def factor():
        if sc.peek() == "!":
            sc.take()
            return NotExpr(factor())
        return primitive()

    def and_high():
        parts = [factor()]
        while True:
            ch = sc.peek()
            if ch == "&":
                sc.take()
                parts.append(factor())
            elif ch and ch not in ",;:]":
                parts.append(factor())
            else:
                break
        return parts[0] if len(parts) == 1 else AndExpr(parts)

    def or_seq():
        parts = [and_high()]
        while sc.peek() == ",":
            sc.take()
            parts.append(and_high())
        return parts[0] if len(parts) == 1 else OrExpr(parts)

    def and_low():
        parts = [or_seq()]
        while sc.peek() == ";":
            sc.take()
            parts.append(or_seq())
        return parts[0] if len(parts) == 1 else AndExpr(parts)

    expr = and_low()
    if sc.peek() == ":":
        sc.take()
        num = sc.digits()
        if num is None:
            raise SmartsSyntaxError("atom map missing digits")
        atom_map[0] = num
    if sc.peek() != "]":
        raise SmartsSyntaxError(
            f"unexpected {sc.peek()!r} in bracket expression")
    sc.take()
    return expr, atom_map[0]


_BOND_PRIMITIVES = {
    "-": lambda: BondOrderIs(1),
    "=": lambda: BondOrderIs(2),
    "#": lambda: BondOrderIs(3),
    ":": BondAromatic,
    "~": BondAny,
    "@": BondInRing,
}


def _parse_bond_expr(sc: _Scanner):
    """Parse a (possibly compound) bond expression; None if absent."""

    def primitive():
        ch = sc.peek()
        if ch in _BOND_PRIMITIVES:
            sc.take()
            return _BOND_PRIMITIVES[ch]()
        if ch in "/\\":
            sc.take()  # directional single bond: direction ignored
            return BondOrderIs(1)
        return None

    def factor():
        if sc.peek() == "!":
            sc.take()
            inner = factor()
            if inner is None:
                raise SmartsSyntaxError("dangling '!' in bond expression")
            return BondNot(inner)
        return primitive()

    def and_high():
        first = factor()
        if first is None:
            return None
        parts = [first]
        while True:
            if sc.peek() == "&":
                sc.take()
                nxt = factor()
                if nxt is None:
                    raise SmartsSyntaxError("dangling '&' in bond expression")
                parts.append(nxt)
            else:
                nxt = factor()
                if nxt is None:
                    break
                parts.append(nxt)
        return parts[0] if len(parts) == 1 else BondAnd(parts)

    def or_seq():
        first = and_high()
        if first is None:
            return None
        parts = [first]
        while sc.peek() == ",":
            sc.take()
            nxt = and_high()
            if nxt is None:
                raise SmartsSyntaxError("dangling ',' in bond expression")
            parts.append(nxt)
        return parts[0] if len(parts) == 1 else BondOr(parts)

    def and_low():
        first = or_seq()
        if first is None:
            return None
        parts = [first]
        while sc.peek() == ";":
            sc.take()
            nxt = or_seq()
            if nxt is None:
                raise SmartsSyntaxError("dangling ';' in bond expression")
            parts.append(nxt)
        return parts[0] if len(parts) == 1 else BondAnd(parts)

    return and_low()


def parse_smarts(text: str) -> Pattern:
    """Parse one connected SMARTS component into a Pattern."""
    if not isinstance(text, str) or not text.strip():
        raise SmartsSyntaxError("empty SMARTS")
    text = text.strip()
    sc = _Scanner(text)

    atoms: list[PatternAtom] = []
    bonds: list[PatternBond] = []
    prev = None
    pending = None
    branch_stack: list = []
    open_rings: dict = {}

    def attach(idx):
        nonlocal prev, pending
        if prev is not None:
            bonds.append(PatternBond(prev, idx,
                                     pending if pending else BondDefault()))
        elif pending is not None:
            raise SmartsSyntaxError("dangling bond expression")
        pending = None
        prev = idx

    while sc.pos < len(sc.text):
        ch = sc.peek()
        if ch == "[":
            sc.take()
            expr, atom_map = _parse_bracket_expr(sc)
            atoms.append(PatternAtom(expr, atom_map))
            attach(len(atoms) - 1)
        elif ch == "(":
            if prev is None:
                raise SmartsSyntaxError("branch before any atom")
            branch_stack.append(prev)
            sc.take()
        elif ch == ")":
            if not branch_stack:
                raise SmartsSyntaxError("unbalanced ')'")
            prev = branch_stack.pop()
            sc.take()
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmartsSyntaxError("ring closure before any atom")
            if ch == "%":
                sc.take()
                two = sc.text[sc.pos:sc.pos + 2]
                if len(two) < 2 or not two.isdigit():
                    raise SmartsSyntaxError("'%' ring closure needs two digits")
                num = int(two)
                sc.pos += 2
            else:
                num = int(sc.take())
            if num in open_rings:
                other, other_pending = open_rings.pop(num)
                expr = pending if pending is not None else other_pending
                bonds.append(PatternBond(other, prev,
                                         expr if expr else BondDefault()))
                pending = None
            else:
                open_rings[num] = (prev, pending)
                pending = None
        elif ch == ".":
            raise UnsupportedFeatureError(
                ".", "multi-component SMARTS: split reaction sides on '.'")
        elif ch == "*":
            sc.take()
            atoms.append(PatternAtom(AnyAtom()))
            attach(len(atoms) - 1)
        elif ch == "a":
            sc.take()
            atoms.append(PatternAtom(AromClass(True)))
            attach(len(atoms) - 1)
        elif ch == "A":
            sc.take()
            atoms.append(PatternAtom(AromClass(False)))
            attach(len(atoms) - 1)
        elif ch in _AROMATIC_SMARTS:
            sc.take()
            atoms.append(PatternAtom(ElementIs(_AROMATIC_SMARTS[ch], True)))
            attach(len(atoms) - 1)
        elif ch.isupper():
            two = sc.text[sc.pos:sc.pos + 2]
            if two in _TWO_LETTER_ORGANIC:
                sc.pos += 2
                atoms.append(PatternAtom(ElementIs(SYMBOL_TO_NUM[two], False)))
            elif ch in "BCNOPSFI":
                sc.take()
                atoms.append(PatternAtom(ElementIs(SYMBOL_TO_NUM[ch], False)))
            else:
                raise SmartsSyntaxError(f"unknown atom symbol {ch!r}")
            attach(len(atoms) - 1)
        else:
            bond = _parse_bond_expr(sc)
            if bond is None:
                raise SmartsSyntaxError(
                    f"unexpected character {ch!r} at {sc.pos}")
            if pending is not None:
                raise SmartsSyntaxError("two bond expressions in a row")
            pending = bond

    if branch_stack:
        raise SmartsSyntaxError("unbalanced '('")
    if open_rings:
        raise SmartsSyntaxError(f"unclosed ring closures: {sorted(open_rings)}")
    if pending is not None:
        raise SmartsSyntaxError("dangling bond expression at end")
    if not atoms:
        raise SmartsSyntaxError("no atoms in pattern")

    pattern = Pattern(atoms, bonds, text)
    _check_connected(pattern)
    _check_unique_maps(pattern)
    return pattern


def _check_connected(pattern: Pattern):
    seen = {0}
    stack = [0]
    while stack:
        a = stack.pop()
        for nbr, _ in pattern.adjacency[a]:
            if nbr not in seen:
                seen.add(nbr)
                stack.append(nbr)
    if len(seen) != pattern.num_atoms:
        raise SmartsSyntaxError("pattern graph is not connected")


def _check_unique_maps(pattern: Pattern):
    seen = set()
    for atom in pattern.atoms:
        if atom.atom_map:
            if atom.atom_map in seen:
                raise SmartsSyntaxError(
                    f"duplicate atom map {atom.atom_map} within pattern")
            seen.add(atom.atom_map)
