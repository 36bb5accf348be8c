"""Minimal completion of metabolic networks under topological, flux and hybrid activation."""

from .completion import (
    SearchOptions,
    Semantics,
    SolveReport,
    Status,
    UnionResult,
    candidate_reactions,
    enumerate_minimal,
    solve_completion,
    union_of_minimal,
)
from .factio import emit_facts, load_instance, parse_facts, write_instance
from .linear import Mode, build_flux_lp, extract_iis, solve_lp, stoichiometrically_activated
from .model import Completion, Instance, MetabolicNetwork, Reaction, extend, union_networks
from .topology import scope, topologically_activated
from .verify import brute_force_minimal, verify_completion

__version__ = "0.1.0"

__all__ = [
    "Completion",
    "Instance",
    "MetabolicNetwork",
    "Mode",
    "Reaction",
    "SearchOptions",
    "Semantics",
    "SolveReport",
    "Status",
    "UnionResult",
    "brute_force_minimal",
    "build_flux_lp",
    "candidate_reactions",
    "emit_facts",
    "enumerate_minimal",
    "extend",
    "extract_iis",
    "load_instance",
    "parse_facts",
    "scope",
    "solve_completion",
    "solve_lp",
    "stoichiometrically_activated",
    "topologically_activated",
    "union_networks",
    "union_of_minimal",
    "verify_completion",
    "write_instance",
]
