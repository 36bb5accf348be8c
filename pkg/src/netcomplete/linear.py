"""Flux LPs for (relaxed) stoichiometric activation, plus IIS extraction."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

import numpy as np

from . import simplex
from .errors import NotInfeasible
from .model import MetabolicNetwork, expand_reversible, expanded_targets, fold_fluxes

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
EPSILON_ACT = 1e-6

FluxAssignment = dict  # reaction id -> flux


class Mode(enum.Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class Row:
    label: str
    coefficients: Mapping[int, float]
    relation: str  # "=", ">=" or "<="
    rhs: float = 0.0

    def __post_init__(self):
        if self.relation not in ("=", ">=", "<="):
            raise ValueError(f"bad relation {self.relation!r}")

    def activity(self, x) -> float:
        return sum(coef * x[j] for j, coef in self.coefficients.items())

    def violation(self, x) -> float:
        lhs = self.activity(x)
        if self.relation == "=":
            return abs(lhs - self.rhs)
        if self.relation == ">=":
            return max(0.0, self.rhs - lhs)
        return max(0.0, lhs - self.rhs)


@dataclass
class LinearProgram:
    variables: list[tuple[str, float, float]]
    rows: list[Row] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    sense: str = "maximize"

    def __post_init__(self):
        for name, lo, hi in self.variables:
            if lo > hi:
                raise ValueError(f"variable {name}: lower bound exceeds upper bound")
        n = len(self.variables)
        for row in self.rows:
            if any(not 0 <= j < n for j in row.coefficients):
                raise ValueError(f"row {row.label} references an undeclared variable")

    @property
    def names(self) -> list[str]:
        return [name for name, _, _ in self.variables]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def with_rows(self, rows: Iterable[Row]) -> "LinearProgram":
        return replace(self, rows=list(self.rows) + list(rows))

    def subset(self, keep: Iterable[int]) -> "LinearProgram":
        return replace(self, rows=[self.rows[i] for i in keep])

    def max_residual(self, assignment: Mapping[str, float]) -> float:
        """Largest row violation of ``assignment`` (bound violations included)."""
        x = [assignment.get(name, 0.0) for name in self.names]
        worst = max((row.violation(x) for row in self.rows), default=0.0)
        for value, (_, lo, hi) in zip(x, self.variables):
            worst = max(worst, lo - value, value - hi)
        return worst

    def row(self, label: str) -> Row:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


@dataclass
class LpOutcome:
    status: LpStatus
    value: float | None = None
    assignment: FluxAssignment | None = None
    iterations: int = 0
    certificate: list[str] | None = None  # labels of rows in an infeasibility proof

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _arrays(lp: LinearProgram):
    n = len(lp.variables)
    A = np.zeros((len(lp.rows), n))
    for i, row in enumerate(lp.rows):
        for j, coef in row.coefficients.items():
            A[i, j] += coef
    b = np.array([row.rhs for row in lp.rows], dtype=float)
    rel = [row.relation for row in lp.rows]
    c = np.zeros(n)
    sign = 1.0 if lp.sense == "maximize" else -1.0
    for j, coef in lp.objective.items():
        c[j] += sign * coef
    lower = [lo for _, lo, _ in lp.variables]
    upper = [hi for _, _, hi in lp.variables]
    return c, A, rel, b, lower, upper, sign


def solve_lp(lp: LinearProgram, *, max_iter: int | None = None, feasibility_only: bool = False) -> LpOutcome:
    """Solve ``lp`` with the two-phase simplex (tolerances 1e-9)."""
    if not lp.variables:
        feasible = all(row.violation([]) <= FEAS_TOL for row in lp.rows)
        return LpOutcome(LpStatus.OPTIMAL, 0.0, {}) if feasible else LpOutcome(LpStatus.INFEASIBLE)
    c, A, rel, b, lower, upper, sign = _arrays(lp)
    result = simplex.solve(
        c, A, rel, b, lower, upper,
        feas_tol=FEAS_TOL, opt_tol=OPT_TOL, max_iter=max_iter, feasibility_only=feasibility_only,
    )
    if result.status == simplex.INFEASIBLE:
        support = None
        if result.certificate is not None:
            scale = max(1.0, float(np.abs(result.certificate).max(initial=0.0)))
            support = [row.label for row, y in zip(lp.rows, result.certificate) if abs(y) > 1e-9 * scale]
        return LpOutcome(LpStatus.INFEASIBLE, iterations=result.iterations, certificate=support)
    if result.status == simplex.UNBOUNDED:
        return LpOutcome(LpStatus.UNBOUNDED, iterations=result.iterations)
    x = _polish(lp, result.x)
    assignment = {name: float(v) for name, v in zip(lp.names, x)}
    return LpOutcome(LpStatus.OPTIMAL, sign * result.value, assignment, result.iterations)


def _polish(lp: LinearProgram, x) -> np.ndarray:
    # round-off can leave a variable a hair outside its own bound or a
    # single-variable row such as v_t >= epsilon; snap it back inside
    x = np.array(x, dtype=float)
    for j, (_, lo, hi) in enumerate(lp.variables):
        x[j] = min(max(x[j], lo), hi)
    for row in lp.rows:
        if len(row.coefficients) != 1:
            continue
        (j, coef), = row.coefficients.items()
        if coef == 0 or row.violation(x) > FEAS_TOL:
            continue
        bound = row.rhs / coef
        if row.relation == "=" or (row.relation == ">=") == (coef > 0):
            if x[j] < bound:
                x[j] = bound
        if row.relation == "=" or (row.relation == "<=") == (coef > 0):
            if x[j] > bound:
                x[j] = bound
    return x


def is_feasible(lp: LinearProgram) -> bool:
    return solve_lp(lp, feasibility_only=True).optimal


def build_flux_lp(
    net: MetabolicNetwork,
    targets: Iterable[str],
    mode: Mode = Mode.STRICT,
    bounds: Mapping[str, tuple[float, float]] | None = None,
) -> LinearProgram:
    """One flux variable per reaction and one balance row per metabolite.

    Producers enter a row with ``+stc(r, m)``, consumers with ``-stc(m, r)``;
    rows are ``= 0`` in strict mode and ``>= 0`` in relaxed mode.  The
    objective maximises the summed flux of ``targets``.  ``bounds``
    overrides the bounds of selected reactions.
    """
    if net.has_reversible:
        raise ValueError("expand reversible reactions before building a flux LP")
    mode = Mode(mode)
    bounds = bounds or {}
    rids = sorted(net.reactions)
    index = {rid: j for j, rid in enumerate(rids)}
    variables = []
    for rid in rids:
        rxn = net.reactions[rid]
        lo, hi = bounds.get(rid, (rxn.lower_bound, rxn.upper_bound))
        variables.append((rid, lo, hi))
    relation = "=" if mode is Mode.STRICT else ">="
    rows = []
    for met in sorted(net.metabolites):
        coefficients: dict[int, float] = {}
        for rid in net.producers[met]:
            coefficients[index[rid]] = coefficients.get(index[rid], 0.0) + net.reactions[rid].products[met]
        for rid in net.consumers[met]:
            coefficients[index[rid]] = coefficients.get(index[rid], 0.0) - net.reactions[rid].reactants[met]
        rows.append(Row(met, coefficients, relation, 0.0))
    objective = {}
    for rid in targets:
        if rid not in index:
            raise KeyError(f"unknown target reaction {rid}")
        objective[index[rid]] = 1.0
    return LinearProgram(variables, rows, objective, "maximize")


def target_rows(lp: LinearProgram, targets: Iterable[str], epsilon: float = EPSILON_ACT) -> list[Row]:
    """Rows ``v_t >= epsilon`` labelled ``target:<id>``."""
    names = {name: j for j, name in enumerate(lp.names)}
    return [Row(f"target:{t}", {names[t]: 1.0}, ">=", epsilon) for t in sorted(targets)]


def activation_lp(net: MetabolicNetwork, targets, mode=Mode.STRICT, epsilon=EPSILON_ACT, bounds=None):
    """Flux LP of an irreversible network with the target rows appended."""
    lp = build_flux_lp(net, targets, mode, bounds)
    return lp.with_rows(target_rows(lp, targets, epsilon))


def stoichiometrically_activated(
    net: MetabolicNetwork,
    targets: Iterable[str],
    mode: Mode = Mode.STRICT,
    epsilon: float = EPSILON_ACT,
    objective: Iterable[str] | None = None,
) -> tuple[bool, FluxAssignment | None]:
    """Whether some flux distribution gives every target a flux of at least ``epsilon``.

    The summed target flux (or the flux of ``objective`` reactions, when
    given) is maximised first; only if that optimum leaves a target below
    ``epsilon`` is the LP re-solved with explicit ``v_t >= epsilon`` rows.
    The witness is keyed by the original (unexpanded) reaction ids.
    """
    expanded = expand_reversible(net)
    xtargets = expanded_targets(expanded, targets)
    lp = build_flux_lp(expanded, xtargets, mode)
    if objective is not None:
        xobj = expanded_targets(expanded, objective)
        lp.objective = {lp.index(r): 1.0 for r in xobj}
    outcome = solve_lp(lp)
    if outcome.optimal and all(outcome.assignment[t] > epsilon for t in xtargets):
        return True, fold_fluxes(expanded, outcome.assignment)
    outcome = solve_lp(lp.with_rows(target_rows(lp, xtargets, epsilon)))
    if not outcome.optimal:
        return False, None
    return True, fold_fluxes(expanded, outcome.assignment)


def maximize_flux(
    net: MetabolicNetwork,
    targets: Iterable[str],
    objective: Iterable[str],
    mode: Mode = Mode.STRICT,
    epsilon: float = EPSILON_ACT,
) -> tuple[float | None, FluxAssignment | None]:
    """Maximal summed ``objective`` flux while every target carries at least ``epsilon``."""
    expanded = expand_reversible(net)
    xtargets = expanded_targets(expanded, targets)
    lp = activation_lp(expanded, xtargets, mode, epsilon)
    lp.objective = {lp.index(r): 1.0 for r in expanded_targets(expanded, objective)}
    outcome = solve_lp(lp)
    if not outcome.optimal:
        return None, None
    return outcome.value, fold_fluxes(expanded, outcome.assignment)


def extract_iis(lp: LinearProgram, on_solve: Callable[[], None] | None = None) -> list[str]:
    """Deletion filter: labels of an irreducible infeasible subset of the rows.

    The filter starts from the rows carrying the solver's infeasibility
    certificate when that subset is itself infeasible, otherwise from all
    rows.  Each row is tentatively dropped; it stays dropped if the
    remainder is still infeasible.  Variable bounds are never dropped.
    ``on_solve`` is called once per LP solved.
    """
    tick = on_solve or (lambda: None)

    def infeasible(keep):
        tick()
        return not solve_lp(lp.subset(keep), feasibility_only=True).optimal

    tick()
    first = solve_lp(lp, feasibility_only=True)
    if first.optimal:
        raise NotInfeasible("the linear program is feasible")
    active = list(range(len(lp.rows)))
    if first.certificate is not None:
        wanted = set(first.certificate)
        support = [k for k in active if lp.rows[k].label in wanted]
        if len(support) < len(active) and infeasible(support):
            active = support
    for i in list(active):
        trial = [k for k in active if k != i]
        if infeasible(trial):
            active = trial
    return [lp.rows[k].label for k in active]


def nonzero(fluxes: Mapping[str, float], tol: float = FEAS_TOL) -> dict[str, float]:
    return {rid: v for rid, v in fluxes.items() if abs(v) > tol and math.isfinite(v)}
