"""Metabolic networks, completion instances and the graph operations on them.

A network is a bipartite reaction/metabolite graph.  Stoichiometric
coefficients are kept as positive magnitudes on the reactant and product
sides of each reaction; signs only appear when mass-balance rows are built
(see :mod:`netcomplete.linear`).
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    IdCollision,
    InconsistentUnion,
    InvalidCompletion,
    InvalidInstance,
    UnknownEntity,
)

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

FORWARD_SUFFIX = "__fwd"
REVERSE_SUFFIX = "__rev"

DEFAULT_LOWER = 0.0
DEFAULT_UPPER = 99999.0


def _check_id(ident: str, kind: str) -> None:
    if not isinstance(ident, str) or not IDENTIFIER.match(ident):
        raise ValueError(f"invalid {kind} identifier: {ident!r}")


def _frozen_coefficients(side: Mapping[str, float] | None, rid: str) -> Mapping[str, float]:
    coefficients = {}
    for met, coef in dict(side or {}).items():
        _check_id(met, "metabolite")
        coef = float(coef)
        if not coef > 0:
            raise ValueError(f"reaction {rid}: coefficient of {met} must be positive, got {coef}")
        coefficients[met] = coef
    return MappingProxyType(coefficients)


@dataclass(frozen=True)
class Reaction:
    id: str
    reactants: Mapping[str, float] = field(default_factory=dict)
    products: Mapping[str, float] = field(default_factory=dict)
    lower_bound: float = DEFAULT_LOWER
    upper_bound: float = DEFAULT_UPPER
    reversible: bool = False
    is_objective: bool = False

    def __post_init__(self):
        _check_id(self.id, "reaction")
        object.__setattr__(self, "reactants", _frozen_coefficients(self.reactants, self.id))
        object.__setattr__(self, "products", _frozen_coefficients(self.products, self.id))
        lb, ub = float(self.lower_bound), float(self.upper_bound)
        if lb < 0 or ub < 0:
            raise ValueError(f"reaction {self.id}: bounds must be non-negative")
        if lb > ub:
            raise ValueError(f"reaction {self.id}: lower bound {lb} exceeds upper bound {ub}")
        object.__setattr__(self, "lower_bound", lb)
        object.__setattr__(self, "upper_bound", ub)

    @property
    def metabolites(self) -> frozenset[str]:
        return frozenset(self.reactants) | frozenset(self.products)

    def same_definition(self, other: "Reaction") -> bool:
        return (
            dict(self.reactants) == dict(other.reactants)
            and dict(self.products) == dict(other.products)
            and self.lower_bound == other.lower_bound
            and self.upper_bound == other.upper_bound
            and self.reversible == other.reversible
        )

    def __eq__(self, other):
        if not isinstance(other, Reaction):
            return NotImplemented
        return self.id == other.id and self.is_objective == other.is_objective and self.same_definition(other)

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        lhs = " + ".join(_term(c, m) for m, c in sorted(self.reactants.items())) or "∅"
        rhs = " + ".join(_term(c, m) for m, c in sorted(self.products.items())) or "∅"
        arrow = "<->" if self.reversible else "->"
        return f"Reaction({self.id}: {lhs} {arrow} {rhs} [{self.lower_bound:g}, {self.upper_bound:g}])"


def _term(coef: float, met: str) -> str:
    return met if coef == 1 else f"{coef:g} {met}"


@dataclass(frozen=True, eq=False)
class MetabolicNetwork:
    """Labeled bipartite graph ``(R ∪ M, E, stc)`` with per-reaction flux bounds.

    ``aliases`` maps ids produced by :func:`expand_reversible` back to the
    reaction they came from; it is empty for networks built directly.
    """

    metabolites: frozenset[str]
    reactions: Mapping[str, Reaction]
    aliases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        mets = frozenset(self.metabolites)
        for met in mets:
            _check_id(met, "metabolite")
        reactions = dict(self.reactions)
        for rid, rxn in reactions.items():
            if rid != rxn.id:
                raise ValueError(f"reaction stored under {rid!r} has id {rxn.id!r}")
            missing = rxn.metabolites - mets
            if missing:
                raise UnknownEntity(f"reaction {rid} references undeclared metabolites {sorted(missing)}")
        object.__setattr__(self, "metabolites", mets)
        object.__setattr__(self, "reactions", MappingProxyType(reactions))
        object.__setattr__(self, "aliases", MappingProxyType(dict(self.aliases)))

    @classmethod
    def from_reactions(
        cls, reactions: Iterable[Reaction], metabolites: Iterable[str] = (), aliases=None
    ) -> "MetabolicNetwork":
        """Build a network, declaring every metabolite the reactions touch."""
        reactions = list(reactions)
        by_id = {}
        for rxn in reactions:
            if rxn.id in by_id:
                raise IdCollision(f"duplicate reaction id {rxn.id}")
            by_id[rxn.id] = rxn
        mets = set(metabolites)
        for rxn in reactions:
            mets |= rxn.metabolites
        return cls(frozenset(mets), by_id, aliases or {})

    @classmethod
    def empty(cls) -> "MetabolicNetwork":
        return cls(frozenset(), {})

    def __eq__(self, other):
        if not isinstance(other, MetabolicNetwork):
            return NotImplemented
        return self.metabolites == other.metabolites and dict(self.reactions) == dict(other.reactions)

    def __len__(self):
        return len(self.reactions)

    def __contains__(self, rid):
        return rid in self.reactions

    def __repr__(self):
        return f"MetabolicNetwork({len(self.reactions)} reactions, {len(self.metabolites)} metabolites)"

    def reactants(self, rid: str) -> frozenset[str]:
        return frozenset(self.reactions[rid].reactants)

    def products(self, rid: str) -> frozenset[str]:
        return frozenset(self.reactions[rid].products)

    @cached_property
    def edges(self) -> frozenset[tuple[str, str]]:
        """``(m, r)`` for every reactant and ``(r, m)`` for every product."""
        out = set()
        for rid, rxn in self.reactions.items():
            out.update((m, rid) for m in rxn.reactants)
            out.update((rid, m) for m in rxn.products)
        return frozenset(out)

    @cached_property
    def stoichiometry(self) -> Mapping[tuple[str, str], float]:
        labels = {}
        for rid, rxn in self.reactions.items():
            labels.update(((m, rid), c) for m, c in rxn.reactants.items())
            labels.update(((rid, m), c) for m, c in rxn.products.items())
        return MappingProxyType(labels)

    @cached_property
    def consumers(self) -> Mapping[str, tuple[str, ...]]:
        index: dict[str, list[str]] = {m: [] for m in self.metabolites}
        for rid in sorted(self.reactions):
            for m in self.reactions[rid].reactants:
                index[m].append(rid)
        return MappingProxyType({m: tuple(rs) for m, rs in index.items()})

    @cached_property
    def producers(self) -> Mapping[str, tuple[str, ...]]:
        index: dict[str, list[str]] = {m: [] for m in self.metabolites}
        for rid in sorted(self.reactions):
            for m in self.reactions[rid].products:
                index[m].append(rid)
        return MappingProxyType({m: tuple(rs) for m, rs in index.items()})

    @property
    def has_reversible(self) -> bool:
        return any(r.reversible for r in self.reactions.values())

    def original_id(self, rid: str) -> str:
        return self.aliases.get(rid, rid)

    def with_reactions(self, extra: Iterable[Reaction]) -> "MetabolicNetwork":
        """Return a copy with ``extra`` reactions (and their metabolites) added."""
        reactions = dict(self.reactions)
        mets = set(self.metabolites)
        for rxn in extra:
            reactions[rxn.id] = rxn
            mets |= rxn.metabolites
        return MetabolicNetwork(frozenset(mets), reactions, self.aliases)

    def without_reactions(self, rids: Iterable[str]) -> "MetabolicNetwork":
        """Drop reactions and any metabolite no remaining reaction touches."""
        drop = set(rids)
        kept = [r for rid, r in self.reactions.items() if rid not in drop]
        return MetabolicNetwork.from_reactions(kept, aliases=self.aliases)


class EntityType(enum.Enum):
    DRAFT = "d"
    REFERENCE = "r"
    SEED = "s"
    TARGET = "t"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Completion:
    chosen: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "chosen", frozenset(self.chosen))

    def __len__(self):
        return len(self.chosen)

    def __iter__(self):
        return iter(sorted(self.chosen))

    def sorted(self) -> tuple[str, ...]:
        return tuple(sorted(self.chosen))

    def __repr__(self):
        return "Completion({" + ", ".join(self.sorted()) + "})"


@dataclass(frozen=True, eq=False)
class Instance:
    """A completion problem: draft ``G``, reference ``G'``, seeds and targets.

    Reference reactions whose id also occurs in the draft are ignored by the
    search; the draft definition is authoritative.
    """

    draft: MetabolicNetwork
    reference: MetabolicNetwork
    seeds: frozenset[str]
    targets: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "seeds", frozenset(self.seeds))
        object.__setattr__(self, "targets", frozenset(self.targets))
        unknown_seeds = self.seeds - self.draft.metabolites
        if unknown_seeds:
            raise InvalidInstance(f"seeds not in the draft network: {sorted(unknown_seeds)}")
        unknown_targets = self.targets - set(self.draft.reactions)
        if unknown_targets:
            raise InvalidInstance(f"targets are not draft reactions: {sorted(unknown_targets)}")
        unseeded = boundary_compounds(self.draft) - self.seeds
        if unseeded:
            raise InvalidInstance(f"boundary compounds must be seeds: {sorted(unseeded)}")

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.draft == other.draft
            and self.reference == other.reference
            and self.seeds == other.seeds
            and self.targets == other.targets
        )

    def __repr__(self):
        return (
            f"Instance(draft={len(self.draft)} reactions, reference={len(self.reference_only)} reactions, "
            f"seeds={sorted(self.seeds)}, targets={sorted(self.targets)})"
        )

    @cached_property
    def reference_only(self) -> tuple[str, ...]:
        """Sorted ids of reference reactions absent from the draft (``R' \\ R``)."""
        return tuple(sorted(set(self.reference.reactions) - set(self.draft.reactions)))

    @property
    def objectives(self) -> frozenset[str]:
        marked = frozenset(rid for rid, r in self.draft.reactions.items() if r.is_objective)
        return marked or self.targets

    @cached_property
    def target_compounds(self) -> frozenset[str]:
        out = set()
        for rid in self.targets:
            out |= self.draft.reactants(rid)
        return frozenset(out)

    @cached_property
    def boundary_reactions(self) -> frozenset[str]:
        boundary = boundary_compounds(self.draft)
        return frozenset(rid for rid, r in self.draft.reactions.items() if boundary & set(r.products))

    @cached_property
    def metabolite_types(self) -> Mapping[str, EntityType]:
        types = {}
        for m in self.reference.metabolites:
            types[m] = EntityType.REFERENCE
        for m in self.draft.metabolites:
            if m in self.target_compounds:
                types[m] = EntityType.TARGET
            elif m in self.seeds:
                types[m] = EntityType.SEED
            else:
                types[m] = EntityType.DRAFT
        return MappingProxyType(types)

    @cached_property
    def reaction_types(self) -> Mapping[str, EntityType]:
        types = {rid: EntityType.REFERENCE for rid in self.reference_only}
        for rid in self.draft.reactions:
            if rid in self.targets:
                types[rid] = EntityType.TARGET
            elif rid in self.boundary_reactions:
                types[rid] = EntityType.SEED
            else:
                types[rid] = EntityType.DRAFT
        return MappingProxyType(types)

    @property
    def typing(self) -> Mapping[tuple[str, str], EntityType]:
        """Entity typing keyed by ``("metabolite", id)`` / ``("reaction", id)``."""
        out = {("metabolite", m): t for m, t in self.metabolite_types.items()}
        out.update({("reaction", r): t for r, t in self.reaction_types.items()})
        return out


def boundary_compounds(net: MetabolicNetwork) -> frozenset[str]:
    """Products of reactions that have no reactants."""
    out = set()
    for rxn in net.reactions.values():
        if not rxn.reactants:
            out |= set(rxn.products)
    return frozenset(out)


def extend(instance: Instance, completion: Completion | Iterable[str]) -> MetabolicNetwork:
    """Draft network plus the chosen reference reactions and their metabolites."""
    chosen = completion.chosen if isinstance(completion, Completion) else frozenset(completion)
    allowed = set(instance.reference_only)
    bad = sorted(chosen - allowed)
    if bad:
        raise InvalidCompletion(f"not reference-only reactions: {bad}")
    return instance.draft.with_reactions(instance.reference.reactions[rid] for rid in sorted(chosen))


def union_networks(g1: MetabolicNetwork, g2: MetabolicNetwork) -> MetabolicNetwork:
    reactions = dict(g1.reactions)
    for rid, rxn in g2.reactions.items():
        mine = reactions.get(rid)
        if mine is None:
            reactions[rid] = rxn
        elif not (mine.same_definition(rxn) and mine.is_objective == rxn.is_objective):
            raise InconsistentUnion(f"reaction {rid} is defined differently in the two networks")
    aliases = {**g1.aliases, **g2.aliases}
    return MetabolicNetwork(g1.metabolites | g2.metabolites, reactions, aliases)


def expand_reversible(net: MetabolicNetwork) -> MetabolicNetwork:
    """Split every reversible reaction into ``<id>__fwd`` and ``<id>__rev``."""
    if not net.has_reversible:
        return net
    reactions = {}
    aliases = dict(net.aliases)
    for rid, rxn in net.reactions.items():
        if not rxn.reversible:
            reactions[rid] = rxn
            continue
        fwd, rev = rid + FORWARD_SUFFIX, rid + REVERSE_SUFFIX
        for new in (fwd, rev):
            if new in net.reactions or new in reactions:
                raise IdCollision(f"cannot expand {rid}: id {new} already exists")
        reactions[fwd] = Reaction(
            fwd, rxn.reactants, rxn.products, rxn.lower_bound, rxn.upper_bound, False, rxn.is_objective
        )
        reactions[rev] = Reaction(rev, rxn.products, rxn.reactants, rxn.lower_bound, rxn.upper_bound, False, False)
        aliases[fwd] = aliases[rev] = net.aliases.get(rid, rid)
    return MetabolicNetwork(net.metabolites, reactions, aliases)


def expanded_targets(net: MetabolicNetwork, targets: Iterable[str]) -> frozenset[str]:
    """Map target ids onto an expanded network (reversible targets run forward)."""
    out = set()
    for rid in targets:
        if rid in net.reactions:
            out.add(rid)
        elif rid + FORWARD_SUFFIX in net.reactions:
            out.add(rid + FORWARD_SUFFIX)
        else:
            raise UnknownEntity(f"unknown target reaction {rid}")
    return frozenset(out)


def fold_fluxes(net: MetabolicNetwork, fluxes: Mapping[str, float]) -> dict[str, float]:
    """Net flux per original reaction: forward minus reverse for split reactions."""
    out: dict[str, float] = {}
    for rid, value in fluxes.items():
        original = net.original_id(rid)
        sign = -1.0 if original != rid and rid.endswith(REVERSE_SUFFIX) else 1.0
        out[original] = out.get(original, 0.0) + sign * value
    return out
