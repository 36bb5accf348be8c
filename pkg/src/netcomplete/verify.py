"""Independent checks of completions and brute-force test oracles.

Nothing here reuses the search engine or the in-house simplex: the scope is
recomputed by plain round iteration and flux feasibility is decided by
SciPy's HiGHS solver.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linprog

from .errors import PoolTooLarge
from .linear import EPSILON_ACT, FluxAssignment
from .model import Completion, Instance, MetabolicNetwork, expand_reversible, expanded_targets, extend, fold_fluxes

MAX_SUBSETS = 2**20

SEMANTICS_FLAGS = {
    "topological": "topological",
    "strict": "stoichiometric",
    "relaxed": "relaxed",
    "hybrid": "hybrid",
}


@dataclass(frozen=True)
class VerificationReport:
    topological: bool
    stoichiometric: bool
    relaxed: bool
    hybrid: bool
    witness: FluxAssignment | None = None

    def holds(self, semantics) -> bool:
        return getattr(self, SEMANTICS_FLAGS[_semantics_name(semantics)])


def _semantics_name(semantics) -> str:
    name = getattr(semantics, "value", semantics)
    return {"topo": "topological", "stoichiometric": "strict"}.get(name, name)


def naive_scope(net: MetabolicNetwork, seeds: Iterable[str]) -> set[str]:
    """Round-by-round closure; every round fires all enabled reactions."""
    net = expand_reversible(net)
    reached = set(seeds)
    while True:
        grown = set(reached)
        for rxn in net.reactions.values():
            if all(m in reached for m in rxn.reactants):
                grown.update(rxn.products)
        if grown == reached:
            return reached
        reached = grown


def topologically_ok(net: MetabolicNetwork, seeds, targets) -> bool:
    reached = naive_scope(net, seeds)
    return all(set(net.reactions[t].reactants) <= reached for t in targets)


def flux_witness(
    net: MetabolicNetwork, targets, strict: bool = True, epsilon: float = EPSILON_ACT
) -> FluxAssignment | None:
    """A flux vector with all targets at ``>= epsilon``, or ``None`` if none exists."""
    expanded = expand_reversible(net)
    xtargets = expanded_targets(expanded, targets)
    rids = sorted(expanded.reactions)
    if not rids:
        return {}
    col = {r: j for j, r in enumerate(rids)}
    mets = sorted(expanded.metabolites)
    S = np.zeros((len(mets), len(rids)))
    for i, m in enumerate(mets):
        for r in rids:
            rxn = expanded.reactions[r]
            S[i, col[r]] = rxn.products.get(m, 0.0) - rxn.reactants.get(m, 0.0)
    bounds = []
    for r in rids:
        rxn = expanded.reactions[r]
        lo = rxn.lower_bound
        if r in xtargets:
            lo = max(lo, epsilon)
        bounds.append((lo, rxn.upper_bound))
    if any(lo > hi for lo, hi in bounds):
        return None
    c = np.zeros(len(rids))
    for t in xtargets:
        c[col[t]] = -1.0
    kwargs = {"A_eq": S, "b_eq": np.zeros(len(mets))} if strict else {"A_ub": -S, "b_ub": np.zeros(len(mets))}
    if not mets:
        kwargs = {}
    res = linprog(c, bounds=bounds, method="highs", **kwargs)
    if res.status != 0:
        return None
    return fold_fluxes(expanded, dict(zip(rids, map(float, res.x))))


def verify_network(
    net: MetabolicNetwork, seeds, targets, epsilon: float = EPSILON_ACT
) -> VerificationReport:
    topo = topologically_ok(net, seeds, targets)
    strict_witness = flux_witness(net, targets, True, epsilon)
    strict = strict_witness is not None
    relaxed_witness = strict_witness if strict else flux_witness(net, targets, False, epsilon)
    return VerificationReport(
        topological=topo,
        stoichiometric=strict,
        relaxed=relaxed_witness is not None,
        hybrid=topo and strict,
        witness=strict_witness if strict else relaxed_witness,
    )


def verify_completion(
    instance: Instance, completion: Completion | Iterable[str], semantics=None, epsilon: float = EPSILON_ACT
) -> VerificationReport:
    """Evaluate all four activation semantics on the completed network.

    ``semantics`` is accepted for symmetry with the CLI; the report always
    carries every flag.
    """
    net = extend(instance, completion)
    return verify_network(net, instance.seeds, instance.targets, epsilon)


def _settle(net, instance, pending, epsilon) -> set[str]:
    """Names in ``pending`` whose semantics ``net`` satisfies.

    Each LP is solved at most once per network; strict feasibility implies
    relaxed feasibility, so the relaxed LP is skipped when strict holds.
    """
    held = set()
    topo = strict = None
    if pending & {"topological", "hybrid"}:
        topo = topologically_ok(net, instance.seeds, instance.targets)
        if topo:
            held.add("topological")
    if "strict" in pending or ("hybrid" in pending and topo) or "relaxed" in pending:
        strict = flux_witness(net, instance.targets, True, epsilon) is not None
        if strict:
            held.update({"strict", "relaxed"})
            if topo:
                held.add("hybrid")
    if "relaxed" in pending and not strict:
        if flux_witness(net, instance.targets, False, epsilon) is not None:
            held.add("relaxed")
    return held & pending


def _subset_count(n: int, max_size: int) -> int:
    return sum(math.comb(n, k) for k in range(min(n, max_size) + 1))


def brute_force_all(
    instance: Instance, semantics_list: Iterable, max_size: int | None = None, epsilon: float = EPSILON_ACT
) -> dict[str, list[Completion]]:
    """All least-size activating completions, per semantics, by exhaustive search.

    Subsets of every reference-only reaction are tried in increasing size; a
    semantics is settled at the first size with any activating subset.
    """
    pool = instance.reference_only
    max_size = len(pool) if max_size is None else max_size
    if _subset_count(len(pool), max_size) > MAX_SUBSETS:
        raise PoolTooLarge(f"{len(pool)} reactions up to size {max_size} exceed {MAX_SUBSETS} subsets")
    pending = {_semantics_name(s) for s in semantics_list}
    found: dict[str, list[Completion]] = {s: [] for s in pending}
    if all(instance.reference.reactions[r].lower_bound == 0 for r in pool):
        # adding zero-lower-bound reactions never destroys activation, so a
        # semantics the whole pool cannot satisfy has no solution at all
        pending &= _settle(extend(instance, pool), instance, pending, epsilon)
    for size in range(min(len(pool), max_size) + 1):
        if not pending:
            break
        hits: dict[str, list[Completion]] = {s: [] for s in pending}
        for combo in itertools.combinations(pool, size):
            net = extend(instance, combo)
            for name in _settle(net, instance, pending, epsilon):
                hits[name].append(Completion(frozenset(combo)))
        for name in list(pending):
            if hits[name]:
                found[name] = sorted(hits[name], key=Completion.sorted)
                pending.discard(name)
    return found


def brute_force_minimal(
    instance: Instance, semantics, max_size: int | None = None, epsilon: float = EPSILON_ACT
) -> list[Completion]:
    """Every activating completion of least size (at most ``max_size``)."""
    name = _semantics_name(semantics)
    return brute_force_all(instance, [name], max_size, epsilon)[name]
