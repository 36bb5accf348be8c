"""Dense two-phase primal simplex on a full tableau.

Finite upper bounds are handled implicitly: a nonbasic variable at its
bound is complemented rather than represented by an extra row.  Pricing is
Dantzig's largest-reduced-cost rule; after a run of degenerate
pivots the solver switches to Bland's smallest-index rule for the rest of
the phase, which rules out cycling.  Once an optimal basis is known the
basic solution is recomputed from the original (unpivoted) data to shed
accumulated round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
DEGENERATE_RUN = 50


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None
    iterations: int = 0
    certificate: np.ndarray | None = None  # row multipliers proving infeasibility


class _Counter:
    def __init__(self, limit):
        self.n = 0
        self.limit = limit

    def tick(self):
        self.n += 1
        if self.n > self.limit:
            raise NumericalFailure(f"simplex exceeded {self.limit} pivots")


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    hit = np.flatnonzero(factors)
    if hit.size:
        T[hit] -= np.outer(factors[hit], T[row])


class _Tableau:
    """Tableau over variables ``0 <= z_k <= upper_k`` with complementing.

    A nonbasic variable sitting at its upper bound is replaced by its
    complement ``upper_k - z_k`` so that every nonbasic variable is zero.
    """

    def __init__(self, T, basis, upper):
        self.T = T
        self.basis = basis
        self.upper = upper
        self.flipped = np.zeros(len(upper), dtype=bool)

    def complement_column(self, k, cost):
        self.T[:, -1] -= self.upper[k] * self.T[:, k]
        self.T[:, k] *= -1.0
        cost[k] = -cost[k]
        self.flipped[k] = not self.flipped[k]

    def complement_basic(self, i, cost):
        k = self.basis[i]
        row = self.T[i]
        row *= -1.0
        row[k] = 1.0
        row[-1] += self.upper[k]
        cost[k] = -cost[k]
        self.flipped[k] = not self.flipped[k]

    def values(self):
        z = np.zeros(len(self.upper))
        z[self.basis] = self.T[:, -1]
        return np.where(self.flipped, self.upper - z, z)


def _iterate(tab: _Tableau, cost, allowed, opt_tol, counter) -> str:
    """Maximise ``cost @ z``; ``cost`` follows the complemented variables."""
    bland = False
    degenerate = 0
    T = tab.T
    ncols = T.shape[1] - 1
    if ncols == 0:
        return OPTIMAL
    while True:
        T = tab.T
        basis = tab.basis
        reduced = cost - cost[basis] @ T[:, :ncols] if len(basis) else cost.copy()
        reduced[~allowed] = -np.inf
        reduced[basis] = 0.0
        if bland:
            improving = np.flatnonzero(reduced > opt_tol)
            if improving.size == 0:
                return OPTIMAL
            enter = int(improving[0])
        else:
            enter = int(np.argmax(reduced))
            if reduced[enter] <= opt_tol:
                return OPTIMAL
        column = T[:, enter]
        rhs = np.maximum(T[:, -1], 0.0)
        ratios = np.full(len(basis), math.inf)
        falling = column > PIVOT_TOL
        ratios[falling] = rhs[falling] / column[falling]
        rising = column < -PIVOT_TOL
        if rising.any():
            room = np.maximum(tab.upper[basis] - rhs, 0.0)
            ratios[rising] = room[rising] / -column[rising]
        best = tab.upper[enter]
        leave = -1
        if len(basis):
            i = int(np.argmin(ratios))
            if ratios[i] < best:
                best = ratios[i]
                ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + best))
                if bland:
                    leave = int(min(ties, key=lambda t: basis[t]))
                else:
                    leave = int(ties[np.argmax(np.abs(column[ties]))])
        to_upper = leave >= 0 and column[leave] < 0
        if not math.isfinite(best):
            return UNBOUNDED
        if best <= 1e-12:
            degenerate += 1
            if degenerate >= DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
        counter.tick()
        if leave < 0:
            # the entering variable reaches its own bound first
            tab.complement_column(enter, cost)
            continue
        if to_upper:
            tab.complement_basic(leave, cost)
        _pivot(tab.T, leave, enter)
        basis[leave] = enter


def solve(
    c,
    A,
    relations,
    b,
    lower,
    upper,
    *,
    feas_tol: float = 1e-9,
    opt_tol: float = 1e-9,
    max_iter: int | None = None,
    feasibility_only: bool = False,
) -> SimplexResult:
    """Maximise ``c @ x`` s.t. ``A[i] @ x (relations[i]) b[i]`` and ``lower <= x <= upper``.

    ``relations`` holds ``"="``, ``">="`` or ``"<="``.  Bounds may be
    infinite.  With ``feasibility_only`` the objective is ignored.
    """
    A = np.asarray(A, dtype=float).reshape(len(relations), -1) if len(relations) else np.zeros((0, len(c)))
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape

    # x = offset + sum(sign * y), 0 <= y <= cap
    columns: list[tuple[int, float]] = []
    offset = np.zeros(n)
    caps: list[float] = []
    for j in range(n):
        lo, hi = float(lower[j]), float(upper[j])
        if lo > hi:
            return SimplexResult(INFEASIBLE)
        if math.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            caps.append(hi - lo)
        elif math.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
            caps.append(math.inf)
        else:
            columns += [(j, 1.0), (j, -1.0)]
            caps += [math.inf, math.inf]
    ny = len(columns)
    M = np.zeros((m, ny))
    for k, (j, sign) in enumerate(columns):
        M[:, k] = sign * A[:, j]
    rhs = b - A @ offset if m else np.zeros(0)
    rel = list(relations)

    flip = rhs < 0
    M[flip] *= -1.0
    rhs[flip] *= -1.0
    rel = [({"<=": ">=", ">=": "<="}.get(r, r) if f else r) for r, f in zip(rel, flip)]

    rows = m
    n_slack = sum(r != "=" for r in rel)
    n_art = sum(r != "<=" for r in rel)
    width = ny + n_slack + n_art
    T = np.zeros((rows, width + 1))
    T[:, :ny] = M
    T[:, -1] = rhs
    basis = [0] * rows
    s = ny
    a = ny + n_slack
    for i, r in enumerate(rel):
        if r == "<=":
            T[i, s] = 1.0
            basis[i] = s
            s += 1
        elif r == ">=":
            T[i, s] = -1.0
            s += 1
            T[i, a] = 1.0
            basis[i] = a
            a += 1
        else:
            T[i, a] = 1.0
            basis[i] = a
            a += 1
    original = T[:, :-1].copy()
    original_rhs = rhs.copy()
    bounds = np.concatenate([np.asarray(caps, dtype=float), np.full(width - ny, math.inf)])
    tab = _Tableau(T, basis, bounds)

    counter = _Counter(max_iter if max_iter is not None else 10 * (rows + width) ** 2)
    is_art = np.zeros(width, dtype=bool)
    is_art[ny + n_slack :] = True

    if n_art:
        phase1 = np.where(is_art, -1.0, 0.0)
        _iterate(tab, phase1, np.ones(width, dtype=bool), opt_tol, counter)
        infeasibility = float(tab.values()[is_art].sum())
        scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
        if infeasibility > feas_tol * scale:
            # phase-one duals: a Farkas certificate over the original rows
            ident = np.empty(rows, dtype=int)
            s_col, a_col = ny, ny + n_slack
            for i, r in enumerate(rel):
                if r == "<=":
                    ident[i] = s_col
                    s_col += 1
                elif r == ">=":
                    s_col += 1
                    ident[i] = a_col
                    a_col += 1
                else:
                    ident[i] = a_col
                    a_col += 1
            duals = phase1[tab.basis] @ tab.T[:, ident]
            duals[flip] *= -1.0
            return SimplexResult(INFEASIBLE, iterations=counter.n, certificate=duals)
        keep = []
        for i in range(rows):
            if not is_art[tab.basis[i]]:
                keep.append(i)
                continue
            candidates = np.flatnonzero(~is_art & (np.abs(tab.T[i, :-1]) > PIVOT_TOL))
            if candidates.size:
                col = int(candidates[np.argmax(np.abs(tab.T[i, candidates]))])
                _pivot(tab.T, i, col)
                tab.basis[i] = col
                keep.append(i)
            # otherwise the row is redundant and dropped
        if len(keep) < rows:
            tab.T = tab.T[keep]
            tab.basis = [tab.basis[i] for i in keep]
            original = original[keep]
            original_rhs = original_rhs[keep]
            rows = len(keep)

    cost = np.zeros(width)
    for k, (j, sign) in enumerate(columns):
        cost[k] = sign * c[j]
    cost[tab.flipped] *= -1.0
    if not feasibility_only:
        status = _iterate(tab, cost, ~is_art, opt_tol, counter)
        if status == UNBOUNDED:
            return SimplexResult(UNBOUNDED, iterations=counter.n)

    z = tab.values()
    if rows:
        # recompute basic values from the original data to shed round-off
        at_upper = tab.flipped.copy()
        at_upper[tab.basis] = False
        shifted = original_rhs - original[:, at_upper] @ bounds[at_upper]
        try:
            refined = np.linalg.solve(original[:, tab.basis], shifted)
        except np.linalg.LinAlgError:
            refined = None
        if refined is not None:
            limit = bounds[tab.basis]
            if np.all(refined >= -feas_tol) and np.all(refined <= limit + feas_tol):
                z[tab.basis] = refined
    z = np.clip(z, 0.0, bounds)

    x = offset.copy()
    for k, (j, sign) in enumerate(columns):
        x[j] += sign * z[k]
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    x = np.minimum(np.maximum(x, lo), hi)
    return SimplexResult(OPTIMAL, x, float(c @ x) if n else 0.0, counter.n)
