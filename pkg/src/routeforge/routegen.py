"""Synthesis-route enumeration over a building-block library.

Routes grow forward from randomly drawn building blocks: the initial
template is drawn with probability proportional to its number of
compatible reactant combinations, then the intermediate is extended with
uniformly drawn compatible partners until no template applies or the
five-step cap is reached. Branching routes grow two sub-routes and join
their intermediates in one step.

Serialized prompt/response pairs list reactions retrosynthetically: the
final product's step comes first and each step's product feeds the step
above it.
"""

from __future__ import annotations

import json
import random

from routeforge.chem.mol import Molecule
from routeforge.errors import NoBranchingFoundError, NoViableStartError
from routeforge.index.library import BuildingBlockLibrary
from routeforge.rxn.template import (
    ReactionTemplate,
    apply_forward,
    reactant_matches,
)

MAX_ROUTE_STEPS = 5


class ReactionStep:
    __slots__ = ("template_id", "reactant_smiles", "product_smiles")

    def __init__(self, template_id: str, reactant_smiles: list[str],
                 product_smiles: str):
        self.template_id = template_id
        self.reactant_smiles = reactant_smiles
        self.product_smiles = product_smiles

    def __repr__(self):
        return (f"ReactionStep({self.template_id}: "
                f"{' + '.join(self.reactant_smiles)} -> "
                f"{self.product_smiles})")


class SynthesisRoute:
    __slots__ = ("steps", "building_blocks", "final_product", "shape")

    def __init__(self, steps: list[ReactionStep], shape: str):
        self.steps = steps
        self.shape = shape
        self.final_product = steps[-1].product_smiles
        self.building_blocks = _leaf_reactants(steps)

    def __repr__(self):
        return (f"SynthesisRoute({len(self.steps)} steps, {self.shape}, "
                f"-> {self.final_product})")


class PromptResponsePair:
    __slots__ = ("instruction", "input", "output")

    def __init__(self, instruction: str, target: str, output: str):
        self.instruction = instruction
        self.input = target
        self.output = output

    def to_json_line(self) -> str:
        return json.dumps({
            "instruction": self.instruction,
            "input": self.input,
            "output": self.output,
        })


def _leaf_reactants(steps: list[ReactionStep]) -> list[str]:
    """Reactants that are not the product of any step, first-use order."""
    products = {s.product_smiles for s in steps}
    seen = set()
    leaves = []
    for step in steps:
        for smiles in step.reactant_smiles:
            if smiles not in products and smiles not in seen:
                seen.add(smiles)
                leaves.append(smiles)
    return leaves


def child_seed(seed: int, *parts: int) -> int:
    """Stable derived seed for per-pair/per-attempt RNG streams."""
    h = seed & 0x7FFFFFFFFFFFFFFF
    for p in parts:
        h = (h * 1000003 + p + 1) & 0x7FFFFFFFFFFFFFFF
    return h


def compatible_bbs(library: BuildingBlockLibrary,
                   template: ReactionTemplate, slot: int) -> tuple[int, ...]:
    """Library positions whose molecule matches the slot pattern; memoized
    on the library instance."""
    cache = getattr(library, "_compat_cache", None)
    if cache is None:
        cache = {}
        library._compat_cache = cache
    key = (template.id, template.smarts_text, slot)
    hit = cache.get(key)
    if hit is None:
        hit = tuple(
            i for i, entry in enumerate(library)
            if reactant_matches(template, slot, entry.mol)
        )
        cache[key] = hit
    return hit


def _combination_weight(library, template) -> int:
    weight = 1
    for slot in range(template.slot_count):
        weight *= len(compatible_bbs(library, template, slot))
    return weight


def _weighted_choice(rng: random.Random, items, weights):
    total = sum(weights)
    pick = rng.random() * total
    acc = 0.0
    for item, weight in zip(items, weights):
        acc += weight
        if pick < acc:
            return item
    return items[-1]


def _extension_options(library, templates, intermediate: Molecule):
    """(template, slot) pairs where the intermediate fits the slot and
    every other slot has at least one compatible building block."""
    options = []
    for template in templates:
        for slot in range(template.slot_count):
            others_ok = all(
                compatible_bbs(library, template, other)
                for other in range(template.slot_count) if other != slot
            )
            if not others_ok:
                continue
            if reactant_matches(template, slot, intermediate):
                options.append((template, slot))
    return options


def _first_step(library, templates, rng):
    """Draw the initial template (weight: compatible combinations) and
    uniform building blocks; returns (step, product molecule) or None."""
    weights = [_combination_weight(library, t) for t in templates]
    if not any(weights):
        raise NoViableStartError(
            "no template has compatible building blocks in every slot")
    template = _weighted_choice(rng, templates, weights)
    bbs = []
    for slot in range(template.slot_count):
        pool = compatible_bbs(library, template, slot)
        bbs.append(library[pool[rng.randrange(len(pool))]])
    products = apply_forward(template, [bb.mol for bb in bbs])
    if not products:
        return None
    product = products[rng.randrange(len(products))]
    step = ReactionStep(template.id,
                        [bb.canonical_smiles for bb in bbs],
                        product.canonical())
    return step, product


def _extend_once(library, templates, rng, current: Molecule):
    """One growth step from the current intermediate; None if no reaction
    is possible."""
    options = _extension_options(library, templates, current)
    if not options:
        return None
    order = rng.sample(options, len(options))
    for template, slot in order:
        reactants: list = [None] * template.slot_count
        names: list = [None] * template.slot_count
        reactants[slot] = current
        names[slot] = current.canonical()
        for other in range(template.slot_count):
            if other == slot:
                continue
            pool = compatible_bbs(library, template, other)
            entry = library[pool[rng.randrange(len(pool))]]
            reactants[other] = entry.mol
            names[other] = entry.canonical_smiles
        products = apply_forward(template, reactants)
        if not products:
            continue
        product = products[rng.randrange(len(products))]
        step = ReactionStep(template.id, names, product.canonical())
        return step, product
    return None


def _grow_linear(library, templates, rng, max_steps):
    result = _first_step(library, templates, rng)
    if result is None:
        return None
    step, current = result
    steps = [step]
    while len(steps) < max_steps:
        extension = _extend_once(library, templates, rng, current)
        if extension is None:
            break
        step, current = extension
        steps.append(step)
    return steps, current


def sample_route(library, templates, rng_seed: int,
                 max_steps: int = MAX_ROUTE_STEPS) -> SynthesisRoute:
    """One linear route, deterministic for a given seed."""
    for attempt in range(50):
        rng = random.Random(child_seed(rng_seed, attempt))
        grown = _grow_linear(library, templates, rng, max_steps)
        if grown is not None:
            return SynthesisRoute(grown[0], "linear")
    raise NoViableStartError("route sampling kept failing construction")


def sample_branching_route(library, templates, rng_seed: int,
                           max_steps: int = MAX_ROUTE_STEPS,
                           max_attempts: int = 100) -> SynthesisRoute:
    """Two sub-routes joined by a step consuming both intermediates.

    Attempts whose sub-route products cannot react together are rejected
    and resampled; the budget guards against fixtures where no join
    exists.
    """
    two_slot = [t for t in templates if t.slot_count == 2]
    if not two_slot:
        raise NoBranchingFoundError("no two-slot template to join with")
    for attempt in range(max_attempts):
        rng = random.Random(child_seed(rng_seed, attempt))
        budget = max_steps - 1  # reserve the join step
        len_a = rng.randint(1, max(1, min(2, budget - 1)))
        len_b = rng.randint(1, max(1, budget - len_a))
        sub_a = _grow_linear(library, templates, rng, len_a)
        sub_b = _grow_linear(library, templates, rng, len_b)
        if sub_a is None or sub_b is None:
            continue
        steps_a, prod_a = sub_a
        steps_b, prod_b = sub_b
        join_options = []
        for template in two_slot:
            if reactant_matches(template, 0, prod_a) \
                    and reactant_matches(template, 1, prod_b):
                join_options.append((template, prod_a, prod_b))
            if reactant_matches(template, 0, prod_b) \
                    and reactant_matches(template, 1, prod_a):
                join_options.append((template, prod_b, prod_a))
        if not join_options:
            continue
        template, first, second = \
            join_options[rng.randrange(len(join_options))]
        products = apply_forward(template, [first, second])
        if not products:
            continue
        product = products[rng.randrange(len(products))]
        join = ReactionStep(template.id,
                            [first.canonical(), second.canonical()],
                            product.canonical())
        return SynthesisRoute(steps_a + steps_b + [join], "branching")
    raise NoBranchingFoundError(
        f"no branching route found in {max_attempts} attempts")


# --------------------------------------------------------------------------
# Serialization to prompt/response pairs

def route_to_response(route: SynthesisRoute, templates) -> dict:
    """Response payload: reactions retrosynthetically, then leaf blocks."""
    by_id = {t.id: t for t in templates}
    reactions = []
    for step in reversed(route.steps):
        reactions.append({
            "reaction_template": by_id[step.template_id].smarts_text,
            "reactants": list(step.reactant_smiles),
            "product": step.product_smiles,
        })
    return {
        "reactions": reactions,
        "building_blocks": list(route.building_blocks),
    }


def route_to_pair(route: SynthesisRoute, templates,
                  instruction: str) -> PromptResponsePair:
    payload = route_to_response(route, templates)
    return PromptResponsePair(instruction, route.final_product,
                              json.dumps(payload))


def generate_pairs(library, templates, n: int, seed: int, shape: str,
                   instruction: str, product_filter=None,
                   dedupe_products: bool = False):
    """n prompt/response pairs; pair i depends only on (seed, i) unless
    deduplication makes it depend on earlier picks."""
    if shape not in ("linear", "branching"):
        raise ValueError(f"unknown route shape {shape!r}")
    sampler = sample_route if shape == "linear" else sample_branching_route
    pairs = []
    seen_products = set()
    for i in range(n):
        pair = None
        for attempt in range(200):
            route = sampler(library, templates,
                            child_seed(seed, i, attempt))
            if product_filter is not None:
                from routeforge.chem.mol import parse_smiles
                if not product_filter(parse_smiles(route.final_product)):
                    continue
            if dedupe_products and route.final_product in seen_products:
                continue
            seen_products.add(route.final_product)
            pair = route_to_pair(route, templates, instruction)
            break
        if pair is None:
            raise NoViableStartError(
                f"could not generate pair {i} within the attempt budget")
        pairs.append(pair)
    return pairs


def generate_corpus(library, templates, n: int, seed: int, shape: str,
                    instruction: str, path, product_filter=None,
                    dedupe_products: bool = False) -> int:
    """Write n pairs as JSON lines; byte-identical across runs."""
    pairs = generate_pairs(library, templates, n, seed, shape, instruction,
                           product_filter, dedupe_products)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(pair.to_json_line())
            fh.write("\n")
    return len(pairs)
