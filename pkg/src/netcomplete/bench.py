"""Synthetic corpora, network degradation and batched completion experiments.

All randomness flows through NumPy's PCG64 generator, seeded explicitly, so a
given seed reproduces the same networks and instances on every platform.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .completion import SearchOptions, Semantics, Status, enumerate_minimal, union_from_report
from .errors import CannotDeactivate
from .factio import emit_facts, parse_facts
from .model import Instance, MetabolicNetwork, Reaction, boundary_compounds
from .verify import flux_witness, topologically_ok, verify_completion

CSV_COLUMNS = (
    "instance_id",
    "semantics",
    "status",
    "optimum_size",
    "n_solutions",
    "union_size",
    "verified",
    "hybrid_verified",
    "lp_calls",
    "elapsed_ms",
)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# -- synthetic networks ------------------------------------------------------


@dataclass(frozen=True)
class SyntheticNetwork:
    network: MetabolicNetwork
    seeds: frozenset[str]
    targets: frozenset[str]


def _pick(rng, pool: Sequence[str], k: int) -> list[str]:
    k = min(k, len(pool))
    return [pool[i] for i in sorted(rng.choice(len(pool), size=k, replace=False))]


def synthetic_network(
    rng: np.random.Generator,
    n_reactions: int = 100,
    layers: int = 8,
    n_seeds: int = 3,
    n_targets: int = 2,
    upper: float = 1000.0,
) -> SyntheticNetwork:
    """A layered metabolic network with back edges, byproducts and sinks.

    Metabolites sit in layers; most reactions consume from earlier layers
    and produce into the next one.  A few reactions run backwards to form
    cycles, and some release a side product.  Only part of the side products
    can be drained, so some routes are reachable yet unable to carry
    balanced flux.  Targets are drawn from reactions that are both reachable
    and flux-active in the intact network.
    """
    width = max(2, round(n_reactions / (2 * layers)))
    mets = [[f"m{layer}_{i}" for i in range(width if layer else n_seeds)] for layer in range(layers)]
    reactions: list[Reaction] = []

    def add(reactants, products):
        rid = f"r{len(reactions)}"
        reactions.append(Reaction(rid, {m: 1 for m in reactants}, {m: 1 for m in products}, 0.0, upper))

    for met in mets[0]:
        add([], [met])
    sinks = [met for met in mets[-1]]
    waste = 0
    internal_budget = n_reactions - n_seeds - len(sinks)
    made = 0
    # every metabolite gets at least one producer
    for layer in range(1, layers):
        for met in mets[layer]:
            sources = _pick(rng, mets[layer - 1], 1) + _pick(rng, [m for ms in mets[:layer] for m in ms], 1)
            add(sorted(set(sources)), [met])
            made += 1
    while made < internal_budget:
        made += 1
        roll = rng.random()
        if roll < 0.08:
            # back edge closing a cycle
            hi = int(rng.integers(2, layers))
            lo = int(rng.integers(1, hi))
            add(_pick(rng, mets[hi], 1), _pick(rng, mets[lo], 1))
            continue
        layer = int(rng.integers(1, layers))
        earlier = [m for ms in mets[:layer] for m in ms]
        reactants = sorted(set(_pick(rng, mets[layer - 1], 1) + _pick(rng, earlier, int(rng.integers(0, 2)))))
        products = _pick(rng, mets[layer], int(rng.integers(1, 3)))
        if rng.random() < 0.3:
            side = f"w{waste}"
            waste += 1
            products = products + [side]
            if rng.random() < 0.5:
                sinks.append(side)
        add(reactants, products)
    for met in sinks:
        add([met], [])
    for ms in mets[1:-1]:
        for met in ms:
            if rng.random() < 0.2:
                add([met], [])

    net = MetabolicNetwork.from_reactions(reactions)
    seeds = boundary_compounds(net)
    targets = choose_targets(rng, net, seeds, n_targets)
    return SyntheticNetwork(net, seeds, targets)


def choose_targets(rng, net: MetabolicNetwork, seeds, n_targets: int) -> frozenset[str]:
    """Random reactions that are jointly active (reachable and flux-carrying)."""
    inner = [rid for rid, rxn in sorted(net.reactions.items()) if rxn.reactants and rxn.products]
    order = [inner[i] for i in rng.permutation(len(inner))]
    chosen: list[str] = []
    for rid in order:
        trial = chosen + [rid]
        if topologically_ok(net, seeds, trial) and flux_witness(net, trial, True) is not None:
            chosen = trial
            if len(chosen) == n_targets:
                break
    if not chosen:
        raise CannotDeactivate("no reaction of the network can be activated")
    return frozenset(chosen)


# -- small random instances (property tests, oracle comparisons) ------------


def random_network(
    rng: np.random.Generator, n_reactions: int, metabolites: Sequence[str], prefix: str = "r", reversible_rate=0.1
) -> MetabolicNetwork:
    reactions = []
    for i in range(n_reactions):
        k_in = int(rng.integers(0, 3))
        k_out = int(rng.integers(0, 3)) if k_in else int(rng.integers(1, 3))
        reactants = {m: int(rng.integers(1, 3)) for m in _pick(rng, metabolites, k_in)}
        products = {m: int(rng.integers(1, 3)) for m in _pick(rng, [m for m in metabolites if m not in reactants], k_out)}
        if not reactants and not products:
            products = {metabolites[0]: 1}
        reactions.append(
            Reaction(
                f"{prefix}{i}", reactants, products, 0.0, float(rng.choice([10.0, 100.0])),
                reversible=bool(rng.random() < reversible_rate),
            )
        )
    return MetabolicNetwork.from_reactions(reactions)


def random_instance(
    rng: np.random.Generator, max_reference: int = 10, max_metabolites: int = 12
) -> Instance:
    """Small random instance: a few seeds, a draft, and up to ``max_reference`` extra reactions."""
    n_mets = int(rng.integers(4, max_metabolites + 1))
    mets = [f"m{i}" for i in range(n_mets)]
    n_seeds = int(rng.integers(1, 3))
    seeds = mets[:n_seeds]
    draft = [Reaction(f"s{i}", {}, {m: 1}, 0.0, 10.0) for i, m in enumerate(seeds)]

    def reaction(rid, pool_in, pool_out):
        k_in = int(rng.integers(1, 3))
        reactants = {m: int(rng.integers(1, 3)) for m in _pick(rng, pool_in, k_in)}
        rest = [m for m in pool_out if m not in reactants]
        products = {m: int(rng.integers(1, 3)) for m in _pick(rng, rest, int(rng.integers(0, 3)))}
        return Reaction(
            rid, reactants, products, 0.0, float(rng.choice([10.0, 100.0])),
            reversible=bool(rng.random() < 0.1),
        )

    for i in range(int(rng.integers(1, 5))):
        draft.append(reaction(f"d{i}", mets, mets))
    n_targets = int(rng.integers(1, 3))
    targets = []
    for i in range(n_targets):
        rxn = reaction(f"t{i}", mets[n_seeds:], mets)
        draft.append(Reaction(rxn.id, rxn.reactants, rxn.products, 0.0, rxn.upper_bound))
        targets.append(rxn.id)
    reference = [reaction(f"x{i}", mets, mets) for i in range(int(rng.integers(1, max_reference + 1)))]
    draft_net = MetabolicNetwork.from_reactions(draft)
    ref_net = MetabolicNetwork.from_reactions(reference)
    return Instance(draft_net, ref_net, frozenset(seeds), frozenset(targets))


# -- degradation --------------------------------------------------------------


@dataclass(frozen=True)
class DegradationConfig:
    fraction: float = 0.2
    rng_seed: int = 0
    targets_per_instance: int = 2
    instances: int = 1

    def __post_init__(self):
        if not 0 < self.fraction < 1:
            raise ValueError("fraction must lie strictly between 0 and 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.targets_per_instance < 1 or self.instances < 1:
            raise ValueError("targets_per_instance and instances must be positive")


def degrade(net: MetabolicNetwork, targets: Iterable[str], cfg: DegradationConfig, seeds=None) -> Instance:
    """Remove random reactions until the targets lose strict activation.

    At least ``ceil(fraction * |R|)`` reactions go; boundary reactions
    (no reactants) and targets are never removed.  The removed reactions
    form the reference network.  Seeds default to the boundary compounds.
    """
    targets = frozenset(targets)
    rng = make_rng(cfg.rng_seed)
    seeds = boundary_compounds(net) if seeds is None else frozenset(seeds)
    removable = sorted(rid for rid, rxn in net.reactions.items() if rid not in targets and rxn.reactants)
    order = [removable[i] for i in rng.permutation(len(removable))]
    quota = math.ceil(cfg.fraction * len(net.reactions))
    removed: list[str] = []
    for rid in order:
        removed.append(rid)
        if len(removed) < quota:
            continue
        draft = net.without_reactions(removed)
        if flux_witness(draft, targets, True) is None:
            break
    else:
        draft = net.without_reactions(removed)
        if not removed or flux_witness(draft, targets, True) is not None:
            raise CannotDeactivate("targets stay active after removing every removable reaction")
    draft = net.without_reactions(removed)
    reference = MetabolicNetwork.from_reactions(net.reactions[rid] for rid in sorted(removed))
    return Instance(draft, reference, seeds & draft.metabolites | boundary_compounds(draft), targets)


def degraded_corpus(
    n_instances: int,
    rng_seed: int = 0,
    fractions: Sequence[float] = (0.1, 0.2, 0.3),
    n_reactions: int = 100,
    targets_per_instance: int = 2,
) -> list[tuple[str, Instance]]:
    """Named instances cycling through ``fractions``; each one from a fresh network."""
    out = []
    seed_seq = np.random.SeedSequence(rng_seed)
    children = seed_seq.spawn(n_instances)
    for i, child in enumerate(children):
        fraction = fractions[i % len(fractions)]
        net_seed, cut_seed = (int(s) for s in child.generate_state(2, dtype=np.uint64))
        for attempt in range(20):
            synth = synthetic_network(make_rng(net_seed + attempt), n_reactions, n_targets=targets_per_instance)
            cfg = DegradationConfig(fraction, cut_seed, targets_per_instance)
            try:
                instance = degrade(synth.network, synth.targets, cfg, synth.seeds)
            except CannotDeactivate:
                continue
            out.append((f"syn{i:03d}_f{round(fraction * 100)}", instance))
            break
    return out


# -- experiments ----------------------------------------------------------------


@dataclass
class StatsTable:
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: "" if row.get(k) is None else row[k] for k in CSV_COLUMNS})
        return buf.getvalue()

    def summary(self) -> list[dict]:
        """Per-semantics aggregates in the order semantics first appear."""
        order: list[str] = []
        groups: dict[str, list[dict]] = {}
        for row in self.rows:
            if row["semantics"] not in groups:
                order.append(row["semantics"])
                groups[row["semantics"]] = []
            groups[row["semantics"]].append(row)
        out = []
        for sem in order:
            rows = groups[sem]
            solved = [r for r in rows if r["n_solutions"]]
            sols = [r["n_solutions"] for r in solved]
            sizes = [r["optimum_size"] for r in solved if r["optimum_size"] is not None]
            total = sum(sols)
            verified = sum(r["verified"] / 100.0 * r["n_solutions"] for r in solved)
            out.append(
                {
                    "semantics": sem,
                    "instances": len(rows),
                    "sols": total,
                    "opts": sum(r["status"] == Status.OPTIMAL.value for r in rows),
                    "verified_pct": 100.0 * verified / total if total else None,
                    "union_verified_pct": (
                        100.0 * sum(bool(r["union_verified"]) for r in solved) / len(solved) if solved else None
                    ),
                    "union_hybrid_pct": (
                        100.0 * sum(bool(r["hybrid_verified"]) for r in solved) / len(solved) if solved else None
                    ),
                    "sols_min": min(sols, default=None),
                    "sols_avg": sum(sols) / len(sols) if sols else None,
                    "sols_max": max(sols, default=None),
                    "size_min": min(sizes, default=None),
                    "size_avg": sum(sizes) / len(sizes) if sizes else None,
                    "size_max": max(sizes, default=None),
                }
            )
        return out

    def format_table(self) -> str:
        headers = ["semantics", "instances", "sols", "opts", "verified%", "union%", "union-hybrid%", "sols/inst", "size"]
        lines = []
        for s in self.summary():
            lines.append(
                [
                    s["semantics"],
                    str(s["instances"]),
                    str(s["sols"]),
                    str(s["opts"]),
                    _pct(s["verified_pct"]),
                    _pct(s["union_verified_pct"]),
                    _pct(s["union_hybrid_pct"]),
                    _span(s["sols_min"], s["sols_avg"], s["sols_max"]),
                    _span(s["size_min"], s["size_avg"], s["size_max"]),
                ]
            )
        widths = [max(len(h), *(len(l[i]) for l in lines)) if lines else len(h) for i, h in enumerate(headers)]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        return "\n".join([fmt.format(*headers)] + [fmt.format(*l) for l in lines]) + "\n"


def _pct(value) -> str:
    return "-" if value is None else f"{value:.2f}"


def _span(lo, avg, hi) -> str:
    return "-" if avg is None else f"{lo}/{avg:.1f}/{hi}"


def _run_one(job) -> dict:
    instance_id, text, semantics, opts = job
    started = time.monotonic()
    row = {k: None for k in CSV_COLUMNS}
    row.update(instance_id=instance_id, semantics=semantics, n_solutions=0, union_verified=False)
    try:
        instance = parse_facts(text)
        report = enumerate_minimal(instance, semantics, opts)
        sem = Semantics.parse(semantics)
        checks = [verify_completion(instance, c, sem, opts.epsilon_act) for c in report.solutions]
        union = union_from_report(instance, report, opts.epsilon_act)
        row.update(
            status=report.status.value,
            optimum_size=report.optimum_size,
            n_solutions=len(report.solutions),
            union_size=len(union.completion) if report.solutions else None,
            verified=round(100.0 * sum(c.holds(sem) for c in checks) / len(checks), 2) if checks else None,
            hybrid_verified=union.hybrid_verified if report.solutions else None,
            union_verified=union.verified,
            lp_calls=report.stats.lp_calls,
        )
    except Exception as exc:  # recorded, never fatal for the batch
        row.update(status=f"Error: {type(exc).__name__}: {exc}")
    row["elapsed_ms"] = round(1000.0 * (time.monotonic() - started), 1)
    return row


def run_experiment(
    instances: Iterable[tuple[str, Instance]],
    semantics: Iterable = ("topological", "hybrid"),
    opts: SearchOptions | None = None,
    workers: int = 1,
) -> StatsTable:
    """Enumerate, union and verify every instance under every semantics.

    Rows come back in input order whatever the worker count.
    """
    opts = opts or SearchOptions()
    names = [Semantics.parse(s).value for s in semantics]
    jobs = [(iid, emit_facts(inst), sem, opts) for iid, inst in instances for sem in names]
    if workers <= 1 or len(jobs) <= 1:
        rows = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    return StatsTable(rows)
