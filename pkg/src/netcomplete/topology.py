"""Scope (reachability closure) and topological activation."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import UnknownEntity
from .model import MetabolicNetwork, expand_reversible


@dataclass(frozen=True)
class Scope:
    reachable: frozenset[str]
    firing: frozenset[str]

    def __contains__(self, met):
        return met in self.reachable


def scope(net: MetabolicNetwork, seeds: Iterable[str]) -> Scope:
    """Least set of metabolites reachable from ``seeds``.

    A reaction fires once all its reactants are reachable (reactions with no
    reactants always fire) and makes its products reachable.  Reversible
    reactions may fire in either direction.  Worklist over per-reaction
    counts of missing reactants, linear in the number of edges.
    """
    seeds = frozenset(seeds)
    unknown = seeds - net.metabolites
    if unknown:
        raise UnknownEntity(f"unknown seed metabolites: {sorted(unknown)}")
    net = expand_reversible(net)
    missing = {rid: len(rxn.reactants) for rid, rxn in net.reactions.items()}
    consumers = net.consumers

    reachable = set(seeds)
    firing = set()
    queue = deque()
    for rid, count in missing.items():
        if count == 0:
            queue.append(rid)
    for met in seeds:
        for rid in consumers[met]:
            missing[rid] -= 1
            if missing[rid] == 0:
                queue.append(rid)

    while queue:
        rid = queue.popleft()
        firing.add(rid)
        for met in net.reactions[rid].products:
            if met in reachable:
                continue
            reachable.add(met)
            for consumer in consumers[met]:
                missing[consumer] -= 1
                if missing[consumer] == 0:
                    queue.append(consumer)

    return Scope(frozenset(reachable), frozenset(net.original_id(r) for r in firing))


def topologically_activated(
    net: MetabolicNetwork, seeds: Iterable[str], targets: Iterable[str]
) -> Mapping[str, bool]:
    """For each target reaction, whether all of its reactants are in scope."""
    targets = list(targets)
    unknown = [t for t in targets if t not in net.reactions]
    if unknown:
        raise UnknownEntity(f"unknown target reactions: {sorted(unknown)}")
    reach = scope(net, seeds).reachable
    return {rid: set(net.reactions[rid].reactants) <= reach for rid in targets}
