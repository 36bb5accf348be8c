"""Cardinality-minimal network completion by branch-and-bound.

The search decides, candidate by candidate, whether a reference reaction
joins the completion.  A node is pruned when even the most generous
completion still reachable from it (every undecided candidate added, with
its lower flux bound relaxed to zero) cannot activate the targets.  Such
failures are turned into no-goods, i.e. sets of excluded candidates of
which at least one must be included; no-goods drive unit propagation and a
disjoint-packing lower bound on the number of reactions still missing.

Solving happens in two phases.  Phase one runs branch-and-bound with a
greedy reachability ordering until the optimum size is proven.  Phase two
walks candidates in id order at that fixed size, which yields optimal
completions in lexicographic order for enumeration (or just the first one).
"""
from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .linear import (
    EPSILON_ACT,
    FluxAssignment,
    Mode,
    activation_lp,
    extract_iis,
    is_feasible,
    maximize_flux,
)
from .model import Completion, Instance, expand_reversible, expanded_targets
from .topology import scope


class Semantics(enum.Enum):
    TOPOLOGICAL = "topological"
    STRICT = "strict"
    RELAXED = "relaxed"
    HYBRID = "hybrid"

    @classmethod
    def parse(cls, value) -> "Semantics":
        if isinstance(value, cls):
            return value
        aliases = {"topo": "topological", "stoichiometric": "strict", "hyb": "hybrid"}
        return cls(aliases.get(str(value).lower(), str(value).lower()))

    @property
    def topological(self) -> bool:
        return self in (Semantics.TOPOLOGICAL, Semantics.HYBRID)

    @property
    def flux_mode(self) -> Mode | None:
        if self in (Semantics.STRICT, Semantics.HYBRID):
            return Mode.STRICT
        if self is Semantics.RELAXED:
            return Mode.RELAXED
        return None


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    SUBOPTIMAL = "Suboptimal"
    NO_SOLUTION = "NoSolution"
    TIMEOUT = "Timeout"


@dataclass
class SearchOptions:
    """Tuning knobs of the search.

    ``prop_percent``: LP feasibility of partial candidate sets is checked
    only once at least this share of candidates is decided.
    ``core_percent``: LP conflicts are minimised to an irreducible
    infeasible subset once at least this share is decided.
    """

    prop_percent: int = 0
    core_percent: int = 0
    enumerate_limit: int | None = None
    time_limit: float | None = None
    epsilon_act: float = EPSILON_ACT

    def __post_init__(self):
        for name in ("prop_percent", "core_percent"):
            value = getattr(self, name)
            if not 0 <= value <= 100:
                raise ValueError(f"{name} must lie in 0..100, got {value}")
        if self.enumerate_limit is not None and self.enumerate_limit < 1:
            raise ValueError("enumerate_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if not self.epsilon_act > 0:
            raise ValueError("epsilon_act must be positive")


@dataclass
class SearchStats:
    nodes: int = 0
    decisions: int = 0
    propagations: int = 0
    lp_calls: int = 0
    iis_calls: int = 0
    conflicts: int = 0
    nogoods: int = 0
    elapsed: float = 0.0


@dataclass
class SolveReport:
    status: Status
    semantics: Semantics
    completions: list[tuple[Completion, FluxAssignment | None]] = field(default_factory=list)
    optimum_size: int | None = None
    objective_flux: float | None = None
    stats: SearchStats = field(default_factory=SearchStats)
    truncated: bool = False

    @property
    def solutions(self) -> list[Completion]:
        return [c for c, _ in self.completions]

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "semantics": self.semantics.value,
            "optimum_size": self.optimum_size,
            "objective_flux": self.objective_flux,
            "truncated": self.truncated,
            "completions": [
                {"reactions": list(c.sorted()), "fluxes": None if flux is None else dict(sorted(flux.items()))}
                for c, flux in self.completions
            ],
            "stats": vars(self.stats).copy(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolveReport":
        return cls(
            status=Status(data["status"]),
            semantics=Semantics.parse(data["semantics"]),
            completions=[
                (Completion(frozenset(item["reactions"])), item.get("fluxes")) for item in data["completions"]
            ],
            optimum_size=data.get("optimum_size"),
            objective_flux=data.get("objective_flux"),
            stats=SearchStats(**data.get("stats", {})),
            truncated=data.get("truncated", False),
        )


class UnionResult(NamedTuple):
    completion: Completion
    verified: bool
    hybrid_verified: bool
    report: SolveReport


def _fires_in(rxn, reached) -> bool:
    return set(rxn.reactants) <= reached


def candidate_reactions(instance: Instance) -> frozenset[str]:
    """Reference-only reactions whose reactants are producible at all.

    Producibility is judged by the scope of draft plus whole reference.
    """
    pool = instance.reference_only
    union = instance.draft.with_reactions(instance.reference.reactions[r] for r in pool)
    reached = scope(union, instance.seeds).reachable
    out = set()
    for rid in pool:
        rxn = instance.reference.reactions[rid]
        if _fires_in(rxn, reached) or (rxn.reversible and set(rxn.products) <= reached):
            out.add(rid)
    return frozenset(out)


class _Stop(Exception):
    pass


class _Enough(Exception):
    pass


class _Search:
    def __init__(self, instance: Instance, semantics: Semantics, opts: SearchOptions, cancel=None):
        self.instance = instance
        self.semantics = semantics
        self.opts = opts
        self.cancel = cancel
        self.stats = SearchStats()
        self.started = time.monotonic()
        self.deadline = None if opts.time_limit is None else self.started + opts.time_limit
        self.mode = semantics.flux_mode
        self.eps = opts.epsilon_act

        self.draft = expand_reversible(instance.draft)
        self.targets = expanded_targets(self.draft, instance.targets)
        self.target_compounds = set()
        for t in self.targets:
            self.target_compounds |= set(self.draft.reactions[t].reactants)
        self.seeds = instance.seeds

        # unreachable reactions can still close flux cycles, so pruning is
        # exact only for the purely topological semantics
        if semantics is Semantics.TOPOLOGICAL:
            pool = candidate_reactions(instance)
        else:
            pool = frozenset(instance.reference_only)
        self.candidates = frozenset(pool)
        self.groups = {}
        for rid in sorted(pool):
            single = instance.reference.reactions[rid]
            expanded = expand_reversible(type(self.draft).from_reactions([single]))
            self.groups[rid] = tuple(expanded.reactions[x] for x in sorted(expanded.reactions))
        self.aliases = dict(self.draft.aliases)
        for rid, rxns in self.groups.items():
            for rxn in rxns:
                if rxn.id != rid:
                    self.aliases[rxn.id] = rid
        self.group_mets = {rid: frozenset().union(*(r.metabolites for r in rxns)) for rid, rxns in self.groups.items()}

        self.nogoods: list[frozenset[str]] = []
        self._nogood_set: set[frozenset[str]] = set()
        self.limit = len(self.candidates)
        self.on_solution = None
        self.choose = None

    # -- networks and checks -------------------------------------------------

    def network(self, chosen: Iterable[str]):
        extra = [rxn for rid in sorted(chosen) for rxn in self.groups[rid]]
        net = self.draft.with_reactions(extra)
        return type(net)(net.metabolites, net.reactions, self.aliases)

    def _tick(self):
        if self.cancel is not None and self.cancel.is_set():
            raise _Stop
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Stop

    def _targets_reached(self, net) -> tuple[bool, frozenset[str]]:
        reached = scope(net, self.seeds).reachable
        return self.target_compounds <= reached, reached

    def exact_ok(self, chosen: frozenset[str], excluded: frozenset[str] = frozenset()) -> bool:
        """Whether draft + ``chosen`` activates the targets.

        A failure also yields a no-good valid everywhere in the tree: some
        reaction outside ``chosen`` that fires in the current scope (or that
        touches an irreducible infeasible subset of the LP) must be added.
        """
        net = self.network(chosen)
        if self.semantics.topological:
            ok, reached = self._targets_reached(net)
            if not ok:
                self._add_nogood(
                    rid
                    for rid in self.candidates - chosen
                    if any(_fires_in(rxn, reached) for rxn in self.groups[rid])
                )
                return False
        if self.mode is None:
            return True
        lp = activation_lp(net, self.targets, self.mode, self.eps)
        self.stats.lp_calls += 1
        if is_feasible(lp):
            return True
        if self._decided_percent(chosen, excluded) >= self.opts.core_percent:
            rows = self._iis(lp)
            self._add_nogood(rid for rid in self.candidates - chosen if self.group_mets[rid] & rows)
        return False

    def _iis(self, lp) -> set[str]:
        self.stats.iis_calls += 1

        def count():
            self.stats.lp_calls += 1

        return set(extract_iis(lp, count))

    def _decided_percent(self, included, excluded) -> float:
        if not self.candidates:
            return 100.0
        return 100.0 * (len(included) + len(excluded)) / len(self.candidates)

    def relaxation_ok(self, included, excluded) -> bool:
        """Check draft + everything not excluded; record a no-good on failure."""
        available = self.candidates - excluded
        net = self.network(available)
        if self.semantics.topological:
            reached_ok, reached = self._targets_reached(net)
            if not reached_ok:
                culprits = {
                    rid
                    for rid in excluded
                    if any(_fires_in(rxn, reached) for rxn in self.groups[rid])
                }
                self._add_nogood(culprits)
                return False
        if self.mode is None:
            return True
        decided = self._decided_percent(included, excluded)
        if decided < self.opts.prop_percent:
            return True
        relaxed_bounds = {
            rxn.id: (0.0, rxn.upper_bound) for rid in available for rxn in self.groups[rid]
        }
        lp = activation_lp(net, self.targets, self.mode, self.eps, relaxed_bounds)
        self.stats.lp_calls += 1
        if is_feasible(lp):
            return True
        if decided >= self.opts.core_percent:
            rows = self._iis(lp)
            culprits = {rid for rid in excluded if self.group_mets[rid] & rows}
        else:
            culprits = set(excluded)
        self._add_nogood(culprits)
        return False

    def _add_nogood(self, members: Iterable[str]):
        self.stats.conflicts += 1
        ng = frozenset(members)
        if ng not in self._nogood_set:
            self._nogood_set.add(ng)
            self.nogoods.append(ng)
            self.stats.nogoods += 1

    # -- propagation and bounds ---------------------------------------------

    def propagate(self, included, excluded):
        """Unit propagation over no-goods; returns ``None`` on conflict."""
        included = set(included)
        changed = True
        while changed:
            changed = False
            for ng in self.nogoods:
                if ng & included:
                    continue
                free = ng - excluded
                if not free:
                    return None
                if len(free) == 1:
                    included |= free
                    self.stats.propagations += 1
                    changed = True
        return frozenset(included)

    def lower_bound(self, included, excluded) -> int:
        open_sets = sorted(
            (ng - excluded for ng in self.nogoods if not ng & included), key=lambda s: (len(s), sorted(s))
        )
        used: set[str] = set()
        count = 0
        for free in open_sets:
            if used.isdisjoint(free):
                used |= free
                count += 1
        return count

    # -- tree search ---------------------------------------------------------

    def dfs(self, included: frozenset, excluded: frozenset, relaxation_known: bool):
        self._tick()
        self.stats.nodes += 1
        propagated = self.propagate(included, excluded)
        if propagated is None:
            self.stats.conflicts += 1
            return
        included = propagated
        if len(included) > self.limit:
            return
        bound = self.lower_bound(included, excluded)
        if len(included) + bound > self.limit:
            return
        if not relaxation_known:
            if not self.relaxation_ok(included, excluded):
                return
            # the new no-good may tighten the bound
            if len(included) + self.lower_bound(included, excluded) > self.limit:
                return
        if bound == 0 and self.exact_ok(included, excluded):
            self.on_solution(included)
            return
        undecided = self.candidates - included - excluded
        if not undecided or len(included) + 1 > self.limit:
            return
        pick = self.choose(included, undecided, excluded)
        self.stats.decisions += 1
        self.dfs(included | {pick}, excluded, True)
        self.dfs(included, excluded | {pick}, False)

    def choose_greedy(self, included, undecided, excluded) -> str:
        # branch inside the tightest unsatisfied no-good when there is one
        open_sets = [ng - excluded for ng in self.nogoods if not ng & included]
        if open_sets:
            undecided = min(open_sets, key=lambda ng: (len(ng), sorted(ng)))
        reached = scope(self.network(included), self.seeds).reachable

        def missing(rid):
            return min(len(set(rxn.reactants) - reached) for rxn in self.groups[rid])

        return min(undecided, key=lambda rid: (missing(rid), rid))

    @staticmethod
    def choose_first(included, undecided, excluded) -> str:
        return min(undecided)

    # -- phases --------------------------------------------------------------

    def minimise(self) -> tuple[frozenset | None, bool]:
        """Phase one; returns the best completion and whether it is proven optimal."""
        best = None

        def record(found):
            nonlocal best
            best = found
            self.limit = len(found) - 1

        self.on_solution = record
        self.choose = self.choose_greedy
        self.limit = len(self.candidates)
        try:
            self.dfs(frozenset(), frozenset(), False)
        except _Stop:
            return best, False
        return best, True

    def enumerate(self, size: int, limit: int | None) -> tuple[list[frozenset], bool]:
        """Phase two: completions of exactly ``size`` in lexicographic order."""
        found: list[frozenset] = []

        def record(solution):
            if len(solution) == size:
                found.append(solution)
                if limit is not None and len(found) >= limit:
                    raise _Enough

        self.on_solution = record
        self.choose = self.choose_first
        self.limit = size
        try:
            self.dfs(frozenset(), frozenset(), False)
        except _Enough:
            return found, True
        except _Stop:
            return found, True
        return found, False


def _witness(search: _Search, chosen: frozenset) -> tuple[FluxAssignment | None, float | None]:
    if search.mode is None:
        return None, None
    net = search.network(chosen)
    objective = expanded_targets(search.draft, search.instance.objectives)
    search.stats.lp_calls += 1
    value, fluxes = maximize_flux(net, search.targets, objective, search.mode, search.eps)
    return fluxes, value


def _run(instance, semantics, opts, enumerate_all, cancel) -> SolveReport:
    semantics = Semantics.parse(semantics)
    opts = opts or SearchOptions()
    search = _Search(instance, semantics, opts, cancel)
    best, proven = search.minimise()

    report = SolveReport(Status.NO_SOLUTION, semantics, stats=search.stats)
    if best is None:
        report.status = Status.NO_SOLUTION if proven else Status.TIMEOUT
    elif not proven:
        report.status = Status.SUBOPTIMAL
        solutions = [best]
    else:
        report.status = Status.OPTIMAL
        report.optimum_size = len(best)
        limit = opts.enumerate_limit if enumerate_all else 1
        solutions, stopped = search.enumerate(len(best), limit)
        if not solutions:
            solutions = [best]
        solutions = sorted(set(solutions), key=sorted)
        if enumerate_all and stopped:
            report.truncated = True

    if best is not None:
        fluxes = []
        flux_values = []
        for chosen in solutions:
            witness, value = _witness(search, chosen)
            fluxes.append((Completion(chosen), witness))
            if value is not None:
                flux_values.append(value)
        report.completions = fluxes
        if semantics in (Semantics.STRICT, Semantics.HYBRID) and flux_values:
            report.objective_flux = max(flux_values)
    search.stats.elapsed = time.monotonic() - search.started
    return report


def solve_completion(
    instance: Instance, semantics, opts: SearchOptions | None = None, cancel: threading.Event | None = None
) -> SolveReport:
    """A minimum-size completion (the lexicographically least one among ties)."""
    return _run(instance, semantics, opts, False, cancel)


def enumerate_minimal(
    instance: Instance, semantics, opts: SearchOptions | None = None, cancel: threading.Event | None = None
) -> SolveReport:
    """All minimum-size completions, up to ``opts.enumerate_limit``, sorted by reaction ids."""
    return _run(instance, semantics, opts, True, cancel)


def union_of_minimal(
    instance: Instance, semantics, opts: SearchOptions | None = None, cancel: threading.Event | None = None
) -> UnionResult:
    """Union of all minimum-size completions and whether it activates the targets.

    ``verified`` refers to the requested semantics, ``hybrid_verified`` to
    hybrid activation; both come from the independent verifier.
    """
    from .verify import verify_completion

    report = enumerate_minimal(instance, semantics, opts, cancel)
    return union_from_report(instance, report, opts.epsilon_act if opts else EPSILON_ACT, verify_completion)


def union_from_report(instance, report: SolveReport, epsilon=EPSILON_ACT, verifier=None) -> UnionResult:
    if verifier is None:
        from .verify import verify_completion as verifier
    chosen = frozenset().union(*(c.chosen for c in report.solutions)) if report.solutions else frozenset()
    union = Completion(chosen)
    if not report.solutions:
        return UnionResult(union, False, False, report)
    check = verifier(instance, union, report.semantics, epsilon)
    return UnionResult(union, check.holds(report.semantics), check.hybrid, report)
