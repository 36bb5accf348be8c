"""Reading and writing instances as ground logic-programming facts.

Seven predicates are understood::

    metabolite(M, T).            reaction(R, T).
    bounds(R, "LB", "UB").       objective(R, T).
    reversible(R).
    rct(M, "COEF", R, T).        prd(M, "COEF", R, T).

``T`` is one of ``d`` (draft), ``r`` (reference), ``s`` (seed) or ``t``
(target).  Entities typed ``d``/``s``/``t`` belong to the draft network and
entities typed ``r`` to the reference network.  ``%`` starts a comment.
"""
from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from typing import TextIO

from .errors import BadNumber, DuplicateFact, FactSyntaxError, MissingBounds, UnknownEntity
from .model import EntityType, Instance, MetabolicNetwork, Reaction

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.])
    """,
    re.VERBOSE,
)

ARITY = {
    "metabolite": 2,
    "reaction": 2,
    "bounds": 3,
    "objective": 2,
    "reversible": 1,
    "rct": 4,
    "prd": 4,
}

TYPE_TOKENS = {t.value for t in EntityType}


@dataclass(frozen=True)
class Fact:
    predicate: str
    args: tuple
    line: int
    column: int


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _tokenize(text: str):
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise FactSyntaxError(f"unexpected character {text[pos]!r}", *_position(text, pos))
        kind = match.lastgroup
        if kind not in ("ws", "comment"):
            yield kind, match.group(), pos
        pos = match.end()


def read_facts(text: str) -> list[Fact]:
    """Split fact text into :class:`Fact` records, checking syntax and arity only."""
    tokens = list(_tokenize(text))
    facts = []
    i = 0

    def expect(kind, value=None):
        nonlocal i
        if i >= len(tokens):
            raise FactSyntaxError(f"unexpected end of input, expected {value or kind}", *_position(text, len(text)))
        tkind, tval, tpos = tokens[i]
        if tkind != kind or (value is not None and tval != value):
            raise FactSyntaxError(f"expected {value or kind}, found {tval!r}", *_position(text, tpos))
        i += 1
        return tval, tpos

    while i < len(tokens):
        name, start = expect("ident")
        line, column = _position(text, start)
        if name not in ARITY:
            raise FactSyntaxError(f"unknown predicate {name!r}", line, column)
        expect("punct", "(")
        args = []
        while True:
            if i >= len(tokens):
                raise FactSyntaxError("unexpected end of input inside fact", *_position(text, len(text)))
            tkind, tval, tpos = tokens[i]
            if tkind not in ("ident", "string", "number"):
                raise FactSyntaxError(f"expected an argument, found {tval!r}", *_position(text, tpos))
            args.append((tkind, tval, tpos))
            i += 1
            sep, _ = expect("punct")
            if sep == ")":
                break
            if sep != ",":
                raise FactSyntaxError(f"expected ',' or ')', found {sep!r}", *_position(text, tokens[i - 1][2]))
        expect("punct", ".")
        if len(args) != ARITY[name]:
            raise FactSyntaxError(f"{name} expects {ARITY[name]} arguments, got {len(args)}", line, column)
        facts.append(Fact(name, tuple(args), line, column))
    return facts


def _ident(arg, text, what):
    kind, value, pos = arg
    if kind != "ident":
        raise FactSyntaxError(f"expected {what} identifier, found {value}", *_position(text, pos))
    return value


def _type(arg, text):
    value = _ident(arg, text, "type")
    if value not in TYPE_TOKENS:
        raise FactSyntaxError(f"unknown type token {value!r} (expected d, r, s or t)", *_position(text, arg[2]))
    return value


def _number(arg, text):
    kind, value, pos = arg
    raw = value[1:-1].strip() if kind == "string" else value
    try:
        number = float(raw)
    except ValueError:
        raise BadNumber(f"not a number: {value}", *_position(text, pos)) from None
    if not math.isfinite(number):
        raise BadNumber(f"not a finite number: {value}", *_position(text, pos))
    return number


def parse_facts(source: str | TextIO, default_bounds: tuple[float, float] | None = None) -> Instance:
    """Build an :class:`Instance` from fact text.

    Facts may come in any order.  Reactions without a ``bounds`` fact get
    ``default_bounds`` or raise :class:`MissingBounds`.
    """
    text = source if isinstance(source, str) else source.read()
    facts = read_facts(text)

    draft_mets: set[str] = set()
    ref_mets: set[str] = set()
    seeds: set[str] = set()
    draft_rxns: dict[str, str] = {}  # id -> type token
    ref_rxns: set[str] = set()
    bounds: dict[str, tuple[float, float]] = {}
    objectives: set[tuple[str, bool]] = set()  # (id, in_reference)
    reversible: set[str] = set()
    sides: dict[tuple[str, bool], tuple[dict, dict]] = {}

    def where(fact):
        return fact.line, fact.column

    for fact in facts:
        if fact.predicate == "metabolite":
            met, typ = _ident(fact.args[0], text, "metabolite"), _type(fact.args[1], text)
            if typ == "r":
                ref_mets.add(met)
            else:
                draft_mets.add(met)
                if typ == "s":
                    seeds.add(met)
        elif fact.predicate == "reaction":
            rid, typ = _ident(fact.args[0], text, "reaction"), _type(fact.args[1], text)
            if typ == "r":
                ref_rxns.add(rid)
            else:
                previous = draft_rxns.get(rid)
                # a target declaration outranks a plain draft one
                if previous is None or typ == "t" or previous == "d":
                    draft_rxns[rid] = typ

    declared_mets = draft_mets | ref_mets
    for fact in facts:
        p = fact.predicate
        if p == "bounds":
            rid = _ident(fact.args[0], text, "reaction")
            if rid not in draft_rxns and rid not in ref_rxns:
                raise UnknownEntity(f"{fact.line}:{fact.column}: bounds for undeclared reaction {rid}")
            if rid in bounds:
                raise DuplicateFact(f"duplicate bounds for reaction {rid}", *where(fact))
            lb, ub = _number(fact.args[1], text), _number(fact.args[2], text)
            if lb < 0 or ub < lb:
                raise BadNumber(f"invalid bounds [{lb}, {ub}] for reaction {rid}", *where(fact))
            bounds[rid] = (lb, ub)
        elif p == "objective":
            rid, typ = _ident(fact.args[0], text, "reaction"), _type(fact.args[1], text)
            in_ref = typ == "r"
            if rid not in (ref_rxns if in_ref else draft_rxns):
                raise UnknownEntity(f"{fact.line}:{fact.column}: objective for undeclared reaction {rid}")
            objectives.add((rid, in_ref))
        elif p == "reversible":
            rid = _ident(fact.args[0], text, "reaction")
            if rid not in draft_rxns and rid not in ref_rxns:
                raise UnknownEntity(f"{fact.line}:{fact.column}: reversible for undeclared reaction {rid}")
            reversible.add(rid)
        elif p in ("rct", "prd"):
            met = _ident(fact.args[0], text, "metabolite")
            coef = _number(fact.args[1], text)
            rid = _ident(fact.args[2], text, "reaction")
            in_ref = _type(fact.args[3], text) == "r"
            if rid not in (ref_rxns if in_ref else draft_rxns):
                raise UnknownEntity(f"{fact.line}:{fact.column}: {p} references undeclared reaction {rid}")
            if met not in declared_mets:
                raise UnknownEntity(f"{fact.line}:{fact.column}: {p} references undeclared metabolite {met}")
            if coef <= 0:
                raise BadNumber(f"stoichiometric coefficient must be positive, got {coef}", *where(fact))
            side = sides.setdefault((rid, in_ref), ({}, {}))[0 if p == "rct" else 1]
            if met in side:
                raise DuplicateFact(f"duplicate {p} fact for {met} in reaction {rid}", *where(fact))
            side[met] = coef

    def build(rid, in_ref):
        if rid in bounds:
            lb, ub = bounds[rid]
        elif default_bounds is not None:
            lb, ub = default_bounds
        else:
            raise MissingBounds(f"reaction {rid} has no bounds fact and no default bounds were given")
        reactants, products = sides.get((rid, in_ref), ({}, {}))
        return Reaction(
            rid,
            reactants,
            products,
            lb,
            ub,
            reversible=rid in reversible,
            is_objective=(rid, in_ref) in objectives,
        )

    draft = MetabolicNetwork.from_reactions((build(r, False) for r in sorted(draft_rxns)), draft_mets)
    reference = MetabolicNetwork.from_reactions((build(r, True) for r in sorted(ref_rxns)), ref_mets)
    targets = {rid for rid, typ in draft_rxns.items() if typ == "t"}
    return Instance(draft, reference, frozenset(seeds), frozenset(targets))


def load_instance(path: str, default_bounds: tuple[float, float] | None = None) -> Instance:
    """Read an instance from ``path``; ``-`` means standard input."""
    if path == "-":
        import sys

        return parse_facts(sys.stdin.read(), default_bounds)
    with open(path, encoding="utf-8") as handle:
        return parse_facts(handle.read(), default_bounds)


def format_number(value: float) -> str:
    """Shortest decimal text that reads back to the same float."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _reaction_facts(rxn: Reaction, typ: str) -> dict[str, list[str]]:
    out = {"reaction": [f"reaction({rxn.id},{typ})."], "rct": [], "prd": []}
    for met, coef in sorted(rxn.reactants.items()):
        out["rct"].append(f'rct({met},"{format_number(coef)}",{rxn.id},{typ}).')
    for met, coef in sorted(rxn.products.items()):
        out["prd"].append(f'prd({met},"{format_number(coef)}",{rxn.id},{typ}).')
    return out


def emit_facts(instance: Instance) -> str:
    """Deterministic fact text; ``parse_facts(emit_facts(x)) == x``."""
    kinds = ["metabolite", "reaction", "bounds", "objective", "reversible", "rct", "prd"]
    lines: dict[str, list[tuple]] = {k: [] for k in kinds}

    mtypes = instance.metabolite_types
    for met in instance.draft.metabolites:
        lines["metabolite"].append((met, f"metabolite({met},{mtypes[met]})."))
        # a seed that is also a target compound keeps its seed status
        if met in instance.seeds and mtypes[met] is not EntityType.SEED:
            lines["metabolite"].append((met, f"metabolite({met},s)."))
    for met in instance.reference.metabolites:
        lines["metabolite"].append((met, f"metabolite({met},r)."))

    rtypes = instance.reaction_types
    networks = [(instance.draft, None), (instance.reference, "r")]
    seen_bounds = set()
    seen_reversible = set()
    for net, forced in networks:
        for rid, rxn in net.reactions.items():
            typ = forced or str(rtypes[rid])
            for kind, facts in _reaction_facts(rxn, typ).items():
                lines[kind].extend((rid, f) for f in facts)
            if rid not in seen_bounds:
                seen_bounds.add(rid)
                lines["bounds"].append(
                    (rid, f'bounds({rid},"{format_number(rxn.lower_bound)}","{format_number(rxn.upper_bound)}").')
                )
            if rxn.is_objective:
                lines["objective"].append((rid, f"objective({rid},{typ})."))
            if rxn.reversible and rid not in seen_reversible:
                seen_reversible.add(rid)
                lines["reversible"].append((rid, f"reversible({rid})."))

    out = io.StringIO()
    for kind in kinds:
        for _, fact in sorted(lines[kind]):
            out.write(fact + "\n")
    return out.getvalue()


def write_instance(instance: Instance, path: str) -> None:
    text = emit_facts(instance)
    if path == "-":
        import sys

        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)

