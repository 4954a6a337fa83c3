"""Reaction templates: reactant patterns >> product patterns with atom maps.

Forward application semantics:
  * mapped pattern atoms carry over, taking element/charge/H edits pinned
    by the product pattern and recomputing attached hydrogens from the
    bond-order delta otherwise;
  * molecule atoms matched by unmapped pattern atoms leave (with any
    fragments reachable only through them);
  * unmatched molecule atoms connected to a mapped atom are transplanted
    intact;
  * bonds between two mapped atoms exist in the product exactly as the
    product pattern writes them.

Products failing valence validation are dropped; survivors are
deduplicated by canonical SMILES.
"""

from __future__ import annotations

from itertools import product as iter_product

from routeforge.chem.mol import (
    Atom,
    Bond,
    Molecule,
    build_molecule,
    implied_hydrogens,
)
from routeforge.errors import (
    MapClosureError,
    RouteForgeError,
    SlotCountError,
    SmartsSyntaxError,
    UnsupportedFeatureError,
)
from routeforge.rxn.match import Match, match_substructure
from routeforge.rxn.smarts import (
    AndExpr,
    AnyAtom,
    BondAromatic,
    BondDefault,
    BondOrderIs,
    ChargeIs,
    ElementIs,
    Pattern,
    TotalHIs,
    parse_smarts,
)

MAX_SLOTS = 2


class ProductAtomSpec:
    """Concrete atom description extracted from a product pattern atom."""

    __slots__ = ("element", "aromatic", "charge", "hydrogens", "atom_map")

    def __init__(self, element, aromatic, charge, hydrogens, atom_map):
        self.element = element
        self.aromatic = aromatic      # None: inherit from reactant
        self.charge = charge          # None: inherit
        self.hydrogens = hydrogens    # None: recompute
        self.atom_map = atom_map


class ProductGraph:
    """Product pattern reduced to concrete atoms and integer-order bonds."""

    __slots__ = ("atoms", "bonds", "smarts_text")

    def __init__(self, atoms, bonds, smarts_text):
        self.atoms = atoms
        self.bonds = bonds  # (i, j, order)
        self.smarts_text = smarts_text


def _concretize_atom(pattern_atom) -> ProductAtomSpec:
    """Product atoms must pin a single element; predicates that cannot be
    written out (wildcards, alternations, negations) are rejected."""
    element = None
    aromatic = None
    charge = None
    hydrogens = None

    def walk(expr):
        nonlocal element, aromatic, charge, hydrogens
        if isinstance(expr, AndExpr):
            for part in expr.parts:
                walk(part)
            return
        if isinstance(expr, ElementIs):
            if element is not None:
                raise UnsupportedFeatureError(
                    repr(expr), "product atom pins two elements")
            element = expr.element
            aromatic = expr.aromatic
            return
        if isinstance(expr, ChargeIs):
            charge = expr.charge
            return
        if isinstance(expr, TotalHIs):
            hydrogens = expr.count
            return
        if isinstance(expr, AnyAtom):
            return
        raise UnsupportedFeatureError(
            repr(expr), f"product atoms must be concrete, got {expr!r}")

    walk(pattern_atom.expr)
    if element is None:
        raise UnsupportedFeatureError(
            repr(pattern_atom.expr), "product atom lacks an element")
    return ProductAtomSpec(element, aromatic, charge, hydrogens,
                           pattern_atom.atom_map)


def _concretize_product(pattern: Pattern) -> ProductGraph:
    atoms = [_concretize_atom(a) for a in pattern.atoms]
    bonds = []
    for pbond in pattern.bonds:
        expr = pbond.expr
        if isinstance(expr, BondOrderIs):
            order = expr.order
        elif isinstance(expr, BondDefault):
            order = 1
        elif isinstance(expr, BondAromatic):
            raise UnsupportedFeatureError(
                ":", "aromatic bonds cannot be created by a product pattern")
        else:
            raise UnsupportedFeatureError(
                repr(expr), "product bonds must be -, = or #")
        bonds.append((pbond.a, pbond.b, order))
    return ProductGraph(atoms, bonds, pattern.smarts_text)


class ReactionTemplate:
    """Parsed transform with 1..2 reactant slots."""

    __slots__ = ("id", "name", "reactant_patterns", "product_patterns",
                 "smarts_text", "_map_sources")

    def __init__(self, template_id, name, reactant_patterns,
                 product_patterns, smarts_text):
        self.id = template_id
        self.name = name
        self.reactant_patterns = reactant_patterns
        self.product_patterns = product_patterns
        self.smarts_text = smarts_text
        self._map_sources = self._collect_map_sources()

    def _collect_map_sources(self):
        sources = {}
        for slot, pattern in enumerate(self.reactant_patterns):
            for pidx, atom in enumerate(pattern.atoms):
                if atom.atom_map:
                    if atom.atom_map in sources:
                        raise MapClosureError(
                            f"map {atom.atom_map} appears in two reactant "
                            "patterns")
                    sources[atom.atom_map] = (slot, pidx)
        return sources

    @property
    def slot_count(self) -> int:
        return len(self.reactant_patterns)

    def __repr__(self):
        return f"ReactionTemplate({self.id}: {self.smarts_text!r})"


def _split_components(text: str):
    """Split a reaction side on top-level dots."""
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "." and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return [p for p in (s.strip() for s in parts) if p]


def parse_reaction(smirks_text: str, template_id: str = "",
                   name: str = "") -> ReactionTemplate:
    """Parse 'reactants >> products' with atom-map closure checking."""
    if smirks_text.count(">>") != 1:
        raise SmartsSyntaxError("reaction needs exactly one '>>'")
    left, right = smirks_text.split(">>")
    reactant_texts = _split_components(left)
    product_texts = _split_components(right)
    if not reactant_texts:
        raise SmartsSyntaxError("reaction has no reactant side")
    if not product_texts:
        raise SmartsSyntaxError("reaction has no product side")
    if len(reactant_texts) > MAX_SLOTS:
        raise SlotCountError(
            f"{len(reactant_texts)} reactant slots; at most {MAX_SLOTS} "
            "supported")

    reactant_patterns = [parse_smarts(t) for t in reactant_texts]
    product_patterns = [_concretize_product(parse_smarts(t))
                        for t in product_texts]

    template = ReactionTemplate(template_id, name, reactant_patterns,
                                product_patterns, smirks_text.strip())

    product_maps = set()
    for graph in product_patterns:
        for spec in graph.atoms:
            if spec.atom_map:
                if spec.atom_map in product_maps:
                    raise MapClosureError(
                        f"map {spec.atom_map} appears twice on the product "
                        "side")
                product_maps.add(spec.atom_map)
                if spec.atom_map not in template._map_sources:
                    raise MapClosureError(
                        f"product map {spec.atom_map} has no reactant source")
    return template


def reactant_matches(template: ReactionTemplate, slot: int,
                     mol: Molecule) -> list[Match]:
    """All embeddings of one slot's pattern into a molecule."""
    if not 0 <= slot < template.slot_count:
        raise SlotCountError(f"slot {slot} out of range")
    matches = match_substructure(template.reactant_patterns[slot], mol)
    return [Match(m.assignment, slot) for m in matches]


def _build_product(template, graph, reactants, combo):
    """Construct one product molecule for a given match combination."""
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    image = {}       # (slot, mol atom) -> product atom index
    old_sum = {}     # product atom index -> reactant bond-order sum
    pinned_h = set()

    matched_per_slot = [set(m.assignment) for m in combo]
    mapped_sources = []  # (slot, mol atom, product atom index)

    for spec in graph.atoms:
        pidx = len(atoms)
        if spec.atom_map:
            slot, pat_idx = template._map_sources[spec.atom_map]
            mol_idx = combo[slot].assignment[pat_idx]
            src = reactants[slot].atoms[mol_idx]
            atom = Atom(
                spec.element if spec.element is not None else src.element,
                src.aromatic if spec.aromatic is None else spec.aromatic,
                src.charge if spec.charge is None else spec.charge,
                src.hydrogens if spec.hydrogens is None else spec.hydrogens,
                src.isotope,
            )
            if spec.hydrogens is not None:
                pinned_h.add(pidx)
            old_sum[pidx] = sum(
                b.order for _, b in reactants[slot].neighbors(mol_idx))
            image[(slot, mol_idx)] = pidx
            mapped_sources.append((slot, mol_idx, pidx))
            atoms.append(atom)
        else:
            atom = Atom(
                spec.element,
                bool(spec.aromatic),
                spec.charge if spec.charge is not None else 0,
                spec.hydrogens if spec.hydrogens is not None else 0,
            )
            if spec.hydrogens is not None:
                pinned_h.add(pidx)
            atoms.append(atom)

    fresh_unpinned = [
        i for i, spec in enumerate(graph.atoms)
        if not spec.atom_map and spec.hydrogens is None
    ]

    for i, j, order in graph.bonds:
        bonds.append(Bond(i, j, order))

    # Transplant unmatched neighborhoods reachable from mapped atoms;
    # fragments attached only through dropped (matched, unmapped) atoms
    # leave with them.
    for slot, mol in enumerate(reactants):
        matched = matched_per_slot[slot]
        visited = set(m for s, m, _ in mapped_sources if s == slot)
        queue = list(visited)
        while queue:
            cur = queue.pop()
            for nbr, _ in mol.neighbors(cur):
                if nbr in matched or nbr in visited:
                    continue
                visited.add(nbr)
                queue.append(nbr)
                image[(slot, nbr)] = len(atoms)
                atoms.append(mol.atoms[nbr].copy())
        # Copy surviving bonds: mapped-mapped pairs come from the product
        # pattern only; anything touching a dropped atom is gone.
        for bond in mol.bonds:
            if bond.a in matched and bond.b in matched:
                continue
            if (slot, bond.a) in image and (slot, bond.b) in image:
                bonds.append(Bond(image[(slot, bond.a)],
                                  image[(slot, bond.b)],
                                  bond.order, bond.aromatic, bond.stereo))

    # Hydrogen bookkeeping on mapped atoms: preserve valence across edits.
    new_sum = [0] * len(atoms)
    for bond in bonds:
        new_sum[bond.a] += bond.order
        new_sum[bond.b] += bond.order
    for slot, mol_idx, pidx in mapped_sources:
        if pidx in pinned_h:
            continue
        h = atoms[pidx].hydrogens + old_sum[pidx] - new_sum[pidx]
        if h < 0:
            return None
        atoms[pidx].hydrogens = h
    for pidx in fresh_unpinned:
        h = implied_hydrogens(atoms[pidx].element, atoms[pidx].charge,
                              new_sum[pidx])
        if h is None:
            return None
        atoms[pidx].hydrogens = h

    try:
        return build_molecule(atoms, bonds)
    except RouteForgeError:
        return None


# apply_forward is pure, so results are shared by semantic key; repeated
# template/reactant combinations dominate route generation and
# reconstruction workloads.
_APPLY_CACHE: dict = {}
_APPLY_CACHE_LIMIT = 200_000


def apply_forward(template: ReactionTemplate, reactants) -> list[Molecule]:
    """Apply a template to positionally-ordered reactants.

    Returns products over all per-slot match combinations, deduplicated by
    canonical SMILES and sorted for determinism. Empty when any slot has
    no match or every construction fails validation.
    """
    reactants = list(reactants)
    if len(reactants) != template.slot_count:
        raise SlotCountError(
            f"expected {template.slot_count} reactants, got {len(reactants)}")

    key = (template.smarts_text, tuple(r.canonical() for r in reactants))
    cached = _APPLY_CACHE.get(key)
    if cached is not None:
        return list(cached)

    per_slot = []
    for slot in range(template.slot_count):
        matches = reactant_matches(template, slot, reactants[slot])
        if not matches:
            per_slot = None
            break
        per_slot.append(matches)

    if per_slot is None:
        products = []
    else:
        seen = {}
        for combo in iter_product(*per_slot):
            for graph in template.product_patterns:
                product = _build_product(template, graph, reactants, combo)
                if product is None:
                    continue
                seen.setdefault(product.canonical(), product)
        products = [seen[k] for k in sorted(seen)]

    if len(_APPLY_CACHE) >= _APPLY_CACHE_LIMIT:
        _APPLY_CACHE.clear()
    _APPLY_CACHE[key] = tuple(products)
    return products


def load_templates(path) -> list[ReactionTemplate]:
    """Load a TSV template file with columns id, name, smirks."""
    templates = []
    ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise SmartsSyntaxError(
                    f"{path}:{lineno}: expected 3 tab-separated columns")
            template_id, name, smirks = (p.strip() for p in parts)
            if template_id in ids:
                raise SmartsSyntaxError(
                    f"{path}:{lineno}: duplicate template id {template_id}")
            ids.add(template_id)
            templates.append(parse_reaction(smirks, template_id, name))
    return templates
