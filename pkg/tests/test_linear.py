import math

import numpy as np
import pytest
from scipy.optimize import linprog

from netcomplete import simplex
from netcomplete.bench import make_rng, random_network
from netcomplete.errors import NotInfeasible, NumericalFailure
from netcomplete.linear import (
    LinearProgram,
    LpStatus,
    Mode,
    Row,
    build_flux_lp,
    extract_iis,
    maximize_flux,
    solve_lp,
    stoichiometrically_activated,
)
from netcomplete.model import MetabolicNetwork, Reaction, expand_reversible, extend, union_networks


def lp(rows, variables=(("x", 0, math.inf),), objective=None):
    return LinearProgram(list(variables), rows, objective or {0: 1.0})


class TestSolver:
    def test_textbook_optimum(self):
        out = solve_lp(lp([Row("c", {0: 1.5}, "<=", 7)], [("x", 0, 10)]))
        assert out.status is LpStatus.OPTIMAL
        assert out.value == pytest.approx(14 / 3, abs=1e-12)

    def test_feasible_non_optimal_point(self):
        program = lp([Row("c", {0: 1.5}, "<=", 7)], [("x", 0, 10)])
        assert program.max_residual({"x": 4.2}) == 0.0

    def test_infeasible(self):
        out = solve_lp(lp([Row("a", {0: 1}, "<=", 0), Row("b", {0: 1}, ">=", 1)]))
        assert out.status is LpStatus.INFEASIBLE

    def test_bound_only(self):
        assert solve_lp(lp([], [("x", 0, 5)])).value == 5

    def test_unbounded(self):
        assert solve_lp(lp([Row("a", {0: 1}, ">=", 1)])).status is LpStatus.UNBOUNDED

    def test_no_variables(self):
        out = solve_lp(LinearProgram([], []))
        assert out.optimal and out.value == 0

    def test_minimize(self):
        program = LinearProgram([("x", 2, 9)], [], {0: 1.0}, "minimize")
        assert solve_lp(program).value == 2

    def test_iteration_limit(self):
        program = lp([Row("a", {0: 1, 1: 1}, "<=", 4), Row("b", {0: 1, 1: -1}, ">=", 1)],
                     [("x", 0, 10), ("y", 0, 10)], {0: 1.0, 1: 2.0})
        with pytest.raises(NumericalFailure):
            solve_lp(program, max_iter=0)

    def test_validation(self):
        with pytest.raises(ValueError):
            LinearProgram([("x", 2, 1)], [])
        with pytest.raises(ValueError):
            LinearProgram([("x", 0, 1)], [Row("r", {3: 1.0}, "=", 0)])
        with pytest.raises(ValueError):
            Row("r", {}, "<", 0)


def _random_lp(rng):
    m, n = int(rng.integers(0, 7)), int(rng.integers(1, 9))
    A = rng.integers(-3, 4, (m, n)).astype(float)
    b = rng.integers(-5, 6, m).astype(float)
    rel = [str(r) for r in rng.choice(["=", "<=", ">="], m)]
    c = rng.integers(-3, 4, n).astype(float)
    lo, hi = [], []
    for _ in range(n):
        kind = int(rng.integers(0, 4))
        if kind == 0:
            lo.append(0.0), hi.append(float(rng.integers(0, 6)))
        elif kind == 1:
            lo.append(-math.inf), hi.append(float(rng.integers(-2, 5)))
        elif kind == 2:
            lo.append(-math.inf), hi.append(math.inf)
        else:
            base = float(rng.integers(-3, 3))
            lo.append(base), hi.append(math.inf if rng.random() < 0.5 else base + float(rng.integers(0, 4)))
    return c, A, rel, b, lo, hi


def _highs(c, A, rel, b, lo, hi):
    eq = [i for i, r in enumerate(rel) if r == "="]
    le = [i for i, r in enumerate(rel) if r == "<="]
    ge = [i for i, r in enumerate(rel) if r == ">="]
    kwargs = {}
    if eq:
        kwargs.update(A_eq=A[eq], b_eq=b[eq])
    if le or ge:
        kwargs.update(A_ub=np.vstack([A[le], -A[ge]]), b_ub=np.concatenate([b[le], -b[ge]]))
    bounds = [(None if math.isinf(l) else l, None if math.isinf(h) else h) for l, h in zip(lo, hi)]
    # presolve can report unbounded models as infeasible
    return linprog(-c, bounds=bounds, method="highs", options={"presolve": False}, **kwargs)


def test_agrees_with_highs_on_random_lps():
    rng = np.random.default_rng(11)
    seen = {"optimal": 0, "infeasible": 0, "unbounded": 0}
    for _ in range(1500):
        c, A, rel, b, lo, hi = _random_lp(rng)
        ours = simplex.solve(c, A, rel, b, lo, hi)
        ref = _highs(c, A, rel, b, lo, hi)
        expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
        seen[expected] += 1
        assert ours.status == expected
        if expected == "optimal":
            assert ours.value == pytest.approx(-ref.fun, abs=1e-7)
            residual = [
                abs(A[i] @ ours.x - b[i]) if r == "=" else max(0.0, (A[i] @ ours.x - b[i]) * (1 if r == "<=" else -1))
                for i, r in enumerate(rel)
            ]
            assert max(residual, default=0.0) <= 1e-9
    assert min(seen.values()) > 100


def test_row_permutation_keeps_optimum():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 200:
        c, A, rel, b, lo, hi = _random_lp(rng)
        lo = [0.0 if math.isinf(v) else v for v in lo]
        hi = [v if math.isfinite(v) else 10.0 for v in hi]
        hi = [max(h, l) for l, h in zip(lo, hi)]
        first = simplex.solve(c, A, rel, b, lo, hi)
        if first.status != "optimal":
            continue
        order = rng.permutation(len(rel))
        second = simplex.solve(c, A[order], [rel[i] for i in order], b[order], lo, hi)
        assert second.value == pytest.approx(first.value, abs=1e-7)
        checked += 1


class TestFluxLp:
    def test_balance_row_for_c(self, toy):
        program = build_flux_lp(extend(toy, ["r6", "r9"]), toy.targets)
        row = program.row("C")
        named = {program.names[j]: coef for j, coef in row.coefficients.items()}
        assert named == {"r4": 2.0, "r2": -1.0, "r5": -1.0}
        assert row.relation == "=" and row.rhs == 0

    def test_relaxed_rows(self, toy):
        program = build_flux_lp(toy.draft, toy.targets, Mode.RELAXED)
        assert {row.relation for row in program.rows} == {">="}

    def test_lone_producer(self):
        net = MetabolicNetwork.from_reactions([Reaction("r", {}, {"A": 1}, 0, 8)])
        assert solve_lp(build_flux_lp(net, ["r"], Mode.STRICT)).value == 0
        assert solve_lp(build_flux_lp(net, ["r"], Mode.RELAXED)).value == 8

    def test_rejects_reversible(self):
        net = MetabolicNetwork.from_reactions([Reaction("r", {}, {"A": 1}, reversible=True)])
        with pytest.raises(ValueError):
            build_flux_lp(net, ["r"])

    def test_toy_activation(self, toy):
        ok, witness = stoichiometrically_activated(extend(toy, ["r6", "r9"]), toy.targets)
        assert ok and witness["r5"] > 0
        assert not stoichiometrically_activated(extend(toy, ["r6"]), toy.targets)[0]
        assert stoichiometrically_activated(extend(toy, ["r6"]), toy.targets, Mode.RELAXED)[0]

    def test_unused_completion_reaction_may_be_idle(self, toy):
        ok, witness = stoichiometrically_activated(extend(toy, ["r6", "r8", "r9"]), toy.targets)
        assert ok and witness["r8"] == pytest.approx(0.0)

    def test_objective_flux(self, toy):
        value, witness = maximize_flux(extend(toy, ["r6", "r8", "r9"]), toy.targets, ["r5"])
        assert value == pytest.approx(49999.5, abs=1e-3)
        assert witness["r_e"] == pytest.approx(99999)

    def test_reversible_network(self):
        net = MetabolicNetwork.from_reactions(
            [
                Reaction("src", {}, {"B": 1}, 0, 4),
                Reaction("rev", {"A": 1}, {"B": 1}, 0, 4, reversible=True),
                Reaction("t", {"A": 1}, {}, 0, 4),
            ]
        )
        ok, witness = stoichiometrically_activated(net, ["t"])
        assert ok and witness["rev"] < 0


class TestIis:
    def test_irrelevant_row_dropped(self):
        program = LinearProgram(
            [("x", -math.inf, math.inf), ("y", -math.inf, math.inf)],
            [Row("x>=1", {0: 1}, ">=", 1), Row("x<=0", {0: 1}, "<=", 0), Row("y<=5", {1: 1}, "<=", 5)],
        )
        assert set(extract_iis(program)) == {"x>=1", "x<=0"}

    def test_already_irreducible(self):
        program = LinearProgram(
            [("x", -math.inf, math.inf)], [Row("a", {0: 1}, ">=", 1), Row("b", {0: 1}, "<=", 0)]
        )
        assert extract_iis(program) == ["a", "b"]

    def test_feasible_raises(self):
        with pytest.raises(NotInfeasible):
            extract_iis(lp([Row("a", {0: 1}, "<=", 3)]))

    def test_accumulating_metabolite(self, toy):
        from netcomplete.linear import activation_lp

        labels = extract_iis(activation_lp(extend(toy, ["r6"]), toy.targets))
        assert "G" in labels
        assert "target:r5" in labels

    def test_minimality(self):
        rng = make_rng(3)
        found = 0
        for _ in range(60):
            net = expand_reversible(random_network(rng, 6, ["a", "b", "c", "d"]))
            targets = sorted(net.reactions)[:1]
            from netcomplete.linear import activation_lp

            program = activation_lp(net, targets)
            if solve_lp(program).optimal:
                continue
            found += 1
            labels = extract_iis(program)
            index = [i for i, r in enumerate(program.rows) if r.label in labels]
            assert not solve_lp(program.subset(index)).optimal
            for drop in index:
                assert solve_lp(program.subset([i for i in index if i != drop])).optimal
        assert found > 5


class TestFluxProperties:
    def _cases(self, n=150):
        rng = make_rng(21)
        mets = ["a", "b", "c", "d", "e"]
        for _ in range(n):
            net = random_network(rng, int(rng.integers(2, 9)), mets)
            targets = sorted(net.reactions)[: int(rng.integers(1, 3))]
            yield rng, mets, net, targets

    def test_strict_implies_relaxed(self):
        for _, _, net, targets in self._cases():
            if stoichiometrically_activated(net, targets, Mode.STRICT)[0]:
                assert stoichiometrically_activated(net, targets, Mode.RELAXED)[0]

    def test_scaling_invariance(self):
        for _, _, net, targets in self._cases():
            for k in (0.01, 1000.0):
                scaled = MetabolicNetwork.from_reactions(
                    Reaction(r.id, r.reactants, r.products, r.lower_bound * k, r.upper_bound * k, r.reversible)
                    for r in net.reactions.values()
                )
                for mode in Mode:
                    assert (
                        stoichiometrically_activated(net, targets, mode)[0]
                        == stoichiometrically_activated(scaled, targets, mode, 1e-6 * k)[0]
                    )

    def test_zero_padded_witness_solves_union(self):
        hits = 0
        for rng, mets, net, targets in self._cases():
            ok, witness = stoichiometrically_activated(net, targets)
            if not ok:
                continue
            hits += 1
            other = random_network(rng, 4, mets, prefix="u")
            union = expand_reversible(union_networks(net, other))
            program = build_flux_lp(union, [])
            padded = {rid: 0.0 for rid in union.reactions}
            for rid, value in witness.items():
                if union.reactions.get(rid) is not None:
                    padded[rid] = value
                else:
                    padded[rid + "__fwd"] = max(value, 0.0)
                    padded[rid + "__rev"] = max(-value, 0.0)
            assert program.max_residual(padded) <= 1e-9
        assert hits > 10

    def test_witness_residuals(self):
        for _, _, net, targets in self._cases():
            x = expand_reversible(net)
            program = build_flux_lp(x, [t if t in x.reactions else t + "__fwd" for t in targets])
            out = solve_lp(program)
            if out.optimal:
                assert program.max_residual(out.assignment) <= 1e-9
