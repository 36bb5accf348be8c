"""Command-line front end: ``netcomplete <subcommand> ...``.

Exit codes: 0 on success, 1 when no completion exists or a check fails,
2 on usage and input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import DegradationConfig, degrade, degraded_corpus, make_rng, run_experiment, synthetic_network
from .completion import SearchOptions, Semantics, enumerate_minimal, solve_completion, union_from_report
from .errors import CannotDeactivate, NetCompleteError
from .factio import emit_facts, load_instance
from .linear import EPSILON_ACT, Mode, nonzero, stoichiometrically_activated
from .model import Instance, extend
from .topology import scope
from .verify import verify_completion

SEMANTICS_CHOICES = ("topo", "strict", "relaxed", "hybrid")


def _bounds(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LB:UB, got {text!r}") from None
    if lo < 0 or lo > hi:
        raise argparse.ArgumentTypeError(f"need 0 <= LB <= UB, got {text!r}")
    return lo, hi


def _percent(text: str) -> int:
    value = int(text)
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError("expected an integer in 0..100")
    return value


def _reaction_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def format_fluxes(fluxes) -> list[str]:
    return [f"{rid}\t{value:.6g}" for rid, value in sorted(nonzero(fluxes or {}).items())]


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for line in lines:
            print(line)


def _instance(args) -> Instance:
    return load_instance(args.instance, getattr(args, "default_bounds", None))


# -- subcommands -----------------------------------------------------------------


def cmd_complete(args) -> int:
    instance = _instance(args)
    opts = SearchOptions(
        prop_percent=args.prop,
        core_percent=args.core,
        enumerate_limit=args.enumerate or None,
        time_limit=args.time_limit,
        epsilon_act=args.epsilon,
    )
    semantics = Semantics.parse(args.semantics)
    enumerate_all = args.enumerate is not None or args.union
    report = (enumerate_minimal if enumerate_all else solve_completion)(instance, semantics, opts)
    payload = report.to_dict()
    lines = [f"% semantics: {semantics.value}  status: {report.status.value}"]
    for i, (completion, fluxes) in enumerate(report.completions, 1):
        lines.append(f"Answer {i}: size {len(completion)}")
        lines.append(" ".join(f"completion({rid})" for rid in completion.sorted()) or "% (empty completion)")
        lines.extend(format_fluxes(fluxes))
    if report.objective_flux is not None:
        lines.append(f"% objective flux: {report.objective_flux:.6g}")
    if report.truncated:
        lines.append("% enumeration truncated")
    code = 0 if report.completions else 1
    if args.union and report.completions:
        union = union_from_report(instance, report, args.epsilon)
        payload["union"] = {
            "reactions": list(union.completion.sorted()),
            "verified": union.verified,
            "hybrid_verified": union.hybrid_verified,
        }
        lines.append("Union:")
        lines.append(" ".join(f"completion({rid})" for rid in union.completion.sorted()) or "% (empty union)")
        lines.append(f"% union verified ({semantics.value}): {str(union.verified).lower()}")
        lines.append(f"% union verified (hybrid): {str(union.hybrid_verified).lower()}")
        if not union.verified:
            code = 1
    _emit(args, payload, lines)
    return code


def cmd_check(args) -> int:
    instance = _instance(args)
    net = extend(instance, args.completion or ())
    mode = Mode(args.semantics)
    active, witness = stoichiometrically_activated(net, instance.targets, mode, args.epsilon)
    payload = {"semantics": mode.value, "activated": active, "fluxes": witness and dict(sorted(witness.items()))}
    lines = [f"activated: {str(active).lower()}"] + format_fluxes(witness)
    _emit(args, payload, lines)
    return 0 if active else 1


def cmd_scope(args) -> int:
    instance = _instance(args)
    result = scope(instance.draft, instance.seeds)
    reachable = sorted(result.reachable)
    _emit(args, {"scope": reachable, "firing": sorted(result.firing)}, reachable)
    return 0


def cmd_verify(args) -> int:
    instance = _instance(args)
    semantics = Semantics.parse(args.semantics)
    report = verify_completion(instance, args.completion or (), semantics, args.epsilon)
    holds = report.holds(semantics)
    flags = {
        "topological": report.topological,
        "stoichiometric": report.stoichiometric,
        "relaxed": report.relaxed,
        "hybrid": report.hybrid,
    }
    payload = {"semantics": semantics.value, "holds": holds, **flags, "witness": report.witness}
    lines = [f"{name}: {str(value).lower()}" for name, value in flags.items()]
    lines.append(f"verdict ({semantics.value}): {'pass' if holds else 'fail'}")
    lines.extend(format_fluxes(report.witness))
    _emit(args, payload, lines)
    return 0 if holds else 1


def cmd_degrade(args) -> int:
    cfg = DegradationConfig(args.fraction, args.seed, args.targets)
    if args.instance is None:
        synth = synthetic_network(make_rng(args.seed), args.reactions, n_targets=args.targets)
        net, targets, seeds = synth.network, synth.targets, synth.seeds
    else:
        source = _instance(args)
        net, targets, seeds = source.draft, source.targets, source.seeds
    instance = degrade(net, targets, cfg, seeds)
    text = emit_facts(instance)
    if args.output:
        Path(args.output).write_text(text)
    payload = {
        "removed": list(instance.reference_only),
        "draft_reactions": len(instance.draft.reactions),
        "targets": sorted(instance.targets),
    }
    if args.json:
        if not args.output:
            payload["facts"] = text
        _emit(args, payload, [])
    elif not args.output:
        sys.stdout.write(text)
    else:
        print(f"removed {len(instance.reference_only)} reactions; wrote {args.output}")
    return 0


def cmd_bench(args) -> int:
    if args.instances_files:
        corpus = [(Path(p).stem, load_instance(p, args.default_bounds)) for p in args.instances_files]
    else:
        corpus = degraded_corpus(args.instances, args.seed, args.fractions, args.reactions, args.targets)
    opts = SearchOptions(
        prop_percent=args.prop,
        core_percent=args.core,
        enumerate_limit=args.enumerate_limit,
        time_limit=args.time_limit,
        epsilon_act=args.epsilon,
    )
    table = run_experiment(corpus, args.semantics, opts, args.workers)
    if args.csv:
        Path(args.csv).write_text(table.to_csv())
    _emit(args, {"rows": table.rows, "summary": table.summary()}, [table.format_table().rstrip("\n")])
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcomplete", description="Metabolic network completion.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True, optional_instance=False):
        if instance:
            p.add_argument(
                "instance", nargs="?" if optional_instance else None, help="fact file, or - for standard input"
            )
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument(
            "--default-bounds", type=_bounds, metavar="LB:UB", help="flux bounds for reactions without a bounds fact"
        )
        p.add_argument("--epsilon", type=float, default=EPSILON_ACT, help="minimum flux counted as active")

    p = sub.add_parser("complete", help="find minimal completions")
    common(p)
    p.add_argument("--semantics", choices=SEMANTICS_CHOICES, default="hybrid", help="activation semantics")
    p.add_argument(
        "--enumerate", nargs="?", type=int, const=0, metavar="N",
        help="list all minimal completions (at most N when given)",
    )
    p.add_argument("--union", action="store_true", help="also report and verify the union of all minimal completions")
    p.add_argument("--prop", type=_percent, default=0, metavar="P", help="LP-check partial sets once P%% is decided")
    p.add_argument("--core", type=_percent, default=0, metavar="C", help="extract conflict cores once C%% is decided")
    p.add_argument("--time-limit", type=float, metavar="S", help="stop after S seconds, keeping the best so far")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("check", help="flux activation of the draft (plus an optional completion)")
    common(p)
    p.add_argument("--semantics", choices=("strict", "relaxed"), default="strict")
    p.add_argument("--completion", type=_reaction_list, metavar="R1,R2", help="reference reactions to add")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scope", help="metabolites reachable from the seeds in the draft")
    common(p)
    p.set_defaults(func=cmd_scope)

    p = sub.add_parser("verify", help="independently verify a completion")
    common(p)
    p.add_argument("--semantics", choices=SEMANTICS_CHOICES, default="hybrid")
    p.add_argument("--completion", type=_reaction_list, metavar="R1,R2", help="reference reactions to add")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("degrade", help="remove reactions until the targets lose flux")
    common(p, optional_instance=True)
    p.add_argument("--fraction", type=float, default=0.2, help="minimum share of reactions to remove")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--targets", type=int, default=2, help="targets of a generated network")
    p.add_argument("--reactions", type=int, default=100, help="size of a generated network (no instance given)")
    p.add_argument("-o", "--output", help="write the instance here instead of standard output")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("bench", help="batch experiment over generated or given instances")
    common(p, instance=False)
    p.add_argument("instances_files", nargs="*", metavar="INSTANCE", help="instances to use instead of generated ones")
    p.add_argument("--instances", type=int, default=10, help="number of generated instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--fractions", type=lambda s: [float(x) for x in s.split(",")], default=[0.1, 0.2, 0.3],
        help="comma-separated degradation fractions",
    )
    p.add_argument("--reactions", type=int, default=100)
    p.add_argument("--targets", type=int, default=2)
    p.add_argument(
        "--semantics", type=lambda s: [Semantics.parse(x).value for x in s.split(",")],
        default=["topological", "hybrid"], help="comma-separated semantics",
    )
    p.add_argument("--prop", type=_percent, default=0)
    p.add_argument("--core", type=_percent, default=0)
    p.add_argument("--enumerate-limit", type=int, default=100)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--csv", help="write per-run rows as CSV")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NetCompleteError, KeyError, ValueError, OSError) as exc:
        if isinstance(exc, CannotDeactivate):
            print(f"netcomplete: {exc}", file=sys.stderr)
            return 1
        print(f"netcomplete: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
