"""SMARTS patterns, substructure matching, and reaction templates."""

from routeforge.rxn.match import Match, has_substructure, match_substructure
from routeforge.rxn.smarts import Pattern, parse_smarts
from routeforge.rxn.template import (
    ReactionTemplate,
    apply_forward,
    load_templates,
    parse_reaction,
    reactant_matches,
)

__all__ = [
    "Pattern",
    "Match",
    "ReactionTemplate",
    "parse_smarts",
    "match_substructure",
    "has_substructure",
    "parse_reaction",
    "reactant_matches",
    "apply_forward",
    "load_templates",
]
