"""Ground-truth linear programming oracle.

A self-contained dense two-phase tableau simplex with Bland's anti-cycling
rule.  Instances here are desk-scale, so the implementation favors
auditability and determinism over speed: every row gets an artificial
variable (the initial basis is the identity), reduced costs are recomputed
from scratch between phases, and dual multipliers are read off the
artificial columns of the final tableau.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .dual_solver import PricePair
from .errors import DimensionMismatch, NumericalBreakdown, TooLarge
from .model import Coupling, ValidatedModel

PIVOT_EPS = 1e-11  # below this magnitude a pivot is inadmissible
RCOST_EPS = 1e-9  # reduced-cost optimality tolerance
PHASE1_TOL = 1e-9  # residual artificial mass that still counts as feasible

DEFAULT_VARIABLE_CAP = 20000


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class StandardFormLP:
    """maximize objective . x  s.t.  eq_matrix x = eq_rhs, ineq_matrix x <= ineq_rhs, x >= 0."""

    objective: np.ndarray  # (n,)
    eq_matrix: np.ndarray  # (m_e, n)
    eq_rhs: np.ndarray  # (m_e,)
    ineq_matrix: np.ndarray  # (m_i, n)
    ineq_rhs: np.ndarray  # (m_i,)

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        E = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        e = np.atleast_1d(np.asarray(self.eq_rhs, dtype=float))
        G = np.atleast_2d(np.asarray(self.ineq_matrix, dtype=float))
        h = np.atleast_1d(np.asarray(self.ineq_rhs, dtype=float))
        n = c.shape[0]
        if E.size == 0:
            E = E.reshape(0, n)
        if G.size == 0:
            G = G.reshape(0, n)
        if E.shape[1] != n or G.shape[1] != n:
            raise DimensionMismatch("constraint matrices must have one column per variable")
        if e.shape != (E.shape[0],) or h.shape != (G.shape[0],):
            raise DimensionMismatch("rhs length must match constraint row count")
        for arr in (c, E, e, G, h):
            if arr.size and not np.all(np.isfinite(arr)):
                raise DimensionMismatch("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_matrix", E)
        object.__setattr__(self, "eq_rhs", e)
        object.__setattr__(self, "ineq_matrix", G)
        object.__setattr__(self, "ineq_rhs", h)


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    primal: Optional[np.ndarray]
    value: Optional[float]
    eq_duals: Optional[np.ndarray]
    ineq_duals: Optional[np.ndarray]


class _Tableau:
    """Dense simplex tableau: columns = [x | slacks | artificials | rhs]."""

    def __init__(self, lp: StandardFormLP):
        n = lp.objective.shape[0]
        m_e = lp.eq_matrix.shape[0]
        m_i = lp.ineq_matrix.shape[0]
        m = m_e + m_i

        body = np.zeros((m, n + m_i + m))
        rhs = np.zeros(m)
        body[:m_e, :n] = lp.eq_matrix
        rhs[:m_e] = lp.eq_rhs
        body[m_e:, :n] = lp.ineq_matrix
        body[m_e:, n : n + m_i] = np.eye(m_i)
        rhs[m_e:] = lp.ineq_rhs

        # flip rows so every rhs is nonnegative; remember signs for duals
        self.row_sign = np.where(rhs < 0, -1.0, 1.0)
        body *= self.row_sign[:, None]
        rhs *= self.row_sign

        body[:, n + m_i :] = np.eye(m)
        self.T = np.hstack([body, rhs[:, None]])
        self.n = n
        self.m_e = m_e
        self.m_i = m_i
        self.m = m
        self.n_slack_end = n + m_i
        self.n_cols = n + m_i + m
        self.basis = list(range(self.n_slack_end, self.n_cols))

    def _pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] = T[row] / T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        self.basis[row] = col

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        cb = cost[self.basis]
        return cost - cb @ self.T[:, :-1]

    def _objective_value(self, cost: np.ndarray) -> float:
        return float(cost[self.basis] @ self.T[:, -1])

    def run_simplex(self, cost: np.ndarray, allowed_end: int) -> LPStatus:
        """Minimize cost . (all vars) with Bland's rule.

        Only columns below ``allowed_end`` may enter the basis.
        """
        while True:
            r = self._reduced_costs(cost)
            entering = -1
            for j in range(allowed_end):
                if r[j] < -RCOST_EPS:
                    entering = j
                    break
            if entering < 0:
                return LPStatus.OPTIMAL

            col = self.T[:, entering]
            rhs = self.T[:, -1]
            best_ratio = np.inf
            leave_row = -1
            saw_tiny_positive = False
            for i in range(self.m):
                if col[i] > PIVOT_EPS:
                    ratio = max(rhs[i], 0.0) / col[i]
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12
                        and leave_row >= 0
                        and self.basis[i] < self.basis[leave_row]
                    ):
                        best_ratio = ratio
                        leave_row = i
                elif col[i] > 0:
                    saw_tiny_positive = True
            if leave_row < 0:
                if saw_tiny_positive:
                    raise NumericalBreakdown(
                        f"no admissible pivot in column {entering}: all positive "
                        f"entries are below {PIVOT_EPS}"
                    )
                return LPStatus.UNBOUNDED
            self._pivot(leave_row, entering)

    def drive_out_artificials(self) -> None:
        """Pivot basic artificials onto structural columns where possible.

        The artificial basics are at (roundoff-level) zero once phase 1
        succeeds, so their rhs is snapped to exactly zero first; the
        drive-out pivots are then degenerate and cannot disturb feasibility.
        A row with no usable structural entry is a redundant constraint and
        keeps its artificial basic at level zero.
        """
        for i in range(self.m):
            if self.basis[i] < self.n_slack_end:
                continue
            self.T[i, -1] = 0.0
            row = self.T[i, : self.n_slack_end]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > PIVOT_EPS:
                self._pivot(i, j)

    def primal_vector(self) -> np.ndarray:
        x = np.zeros(self.n)
        for i, j in enumerate(self.basis):
            if j < self.n:
                x[j] = max(self.T[i, -1], 0.0)
        return x

    def duals(self, cost: np.ndarray) -> np.ndarray:
        """Row multipliers of the minimization, in original row order/sign."""
        r = self._reduced_costs(cost)
        lam = -r[self.n_slack_end : self.n_cols]
        return lam * self.row_sign


def solve_lp(lp: StandardFormLP) -> LPSolution:
    """Two-phase dense simplex.  Returns status, primal, value, and duals.

    Duals follow the maximization convention: ``ineq_duals >= 0`` and
    ``value == eq_rhs . eq_duals + ineq_rhs . ineq_duals`` at an optimum.
    """
    tab = _Tableau(lp)

    # Phase 1: minimize total artificial mass from the identity basis.
    phase1_cost = np.zeros(tab.n_cols)
    phase1_cost[tab.n_slack_end :] = 1.0
    status = tab.run_simplex(phase1_cost, allowed_end=tab.n_slack_end)
    if status is LPStatus.UNBOUNDED:  # cannot happen: phase-1 objective >= 0
        raise NumericalBreakdown("phase 1 reported unbounded")
    if tab._objective_value(phase1_cost) > PHASE1_TOL:
        return LPSolution(
            status=LPStatus.INFEASIBLE,
            primal=None,
            value=None,
            eq_duals=None,
            ineq_duals=None,
        )
    tab.drive_out_artificials()

    # Phase 2: minimize the negated objective over structural columns.
    phase2_cost = np.zeros(tab.n_cols)
    phase2_cost[: tab.n] = -lp.objective
    status = tab.run_simplex(phase2_cost, allowed_end=tab.n_slack_end)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(
            status=LPStatus.UNBOUNDED,
            primal=None,
            value=None,
            eq_duals=None,
            ineq_duals=None,
        )

    x = tab.primal_vector()
    value = float(lp.objective @ x)
    lam = tab.duals(phase2_cost)
    duals = -lam  # flip from the internal minimization back to maximization
    eq_duals = duals[: tab.m_e]
    ineq_duals = duals[tab.m_e :]
    # roundoff can leave inequality duals a hair below zero
    ineq_duals = np.where(
        (ineq_duals < 0) & (ineq_duals > -1e-9), 0.0, ineq_duals
    )
    return LPSolution(
        status=LPStatus.OPTIMAL,
        primal=x,
        value=value,
        eq_duals=eq_duals,
        ineq_duals=ineq_duals,
    )


@dataclass(frozen=True)
class DiscretePrimalSolution:
    """Direct solution of the discretized transport problem."""

    status: LPStatus
    coupling: Optional[Coupling]
    value: Optional[float]
    prices: Optional[PricePair]
    type_potentials: Optional[np.ndarray]


def _transport_lp_rows(model: ValidatedModel, columns: np.ndarray):
    """Equality/inequality rows of the transport LP restricted to ``columns``.

    ``columns`` holds flattened (i, x) variable indices (x fastest).
    Equality rows: one mass-conservation row per type point, then the
    equality constraint block; inequality rows: the inequality block.
    """
    n = model.n_types
    n_alt = model.n_alternatives
    n_var = columns.shape[0]
    rows_i = columns // n_alt
    rows_x = columns % n_alt

    eq = np.zeros((n + model.n_eq, n_var))
    eq[rows_i, np.arange(n_var)] = 1.0
    if model.n_eq:
        eq[n:, :] = model.constraints.B[:, rows_x]
    eq_rhs = np.concatenate([model.cloud.weights, model.constraints.b])

    if model.n_ineq:
        ineq = model.constraints.A[:, rows_x]
    else:
        ineq = np.zeros((0, n_var))
    return eq, eq_rhs, ineq, model.constraints.a


def solve_discretized_primal(
    model: ValidatedModel, variable_cap: int = DEFAULT_VARIABLE_CAP
) -> DiscretePrimalSolution:
    """Solve the discretized transport problem directly.

    Variables are the coupling entries; the dual multipliers split into one
    potential per type point and a ``PricePair`` for the constraint blocks.
    """
    n = model.n_types
    n_alt = model.n_alternatives
    if n * n_alt > variable_cap:
        raise TooLarge(f"{n * n_alt} variables exceed the cap of {variable_cap}")

    columns = np.arange(n * n_alt)
    eq, eq_rhs, ineq, ineq_rhs = _transport_lp_rows(model, columns)
    lp = StandardFormLP(
        objective=model.surplus.values.ravel(),
        eq_matrix=eq,
        eq_rhs=eq_rhs,
        ineq_matrix=ineq,
        ineq_rhs=ineq_rhs,
    )
    sol = solve_lp(lp)
    if sol.status is not LPStatus.OPTIMAL:
        return DiscretePrimalSolution(
            status=sol.status, coupling=None, value=None, prices=None,
            type_potentials=None,
        )
    coupling = Coupling(mass=sol.primal.reshape(n, n_alt))
    prices = PricePair(p=np.maximum(sol.ineq_duals, 0.0), q=sol.eq_duals[n:])
    return DiscretePrimalSolution(
        status=LPStatus.OPTIMAL,
        coupling=coupling,
        value=sol.value,
        prices=prices,
        type_potentials=sol.eq_duals[:n],
    )


def feasibility_on_support(
    model: ValidatedModel,
    support: Iterable[tuple[int, int]],
    variable_cap: int = DEFAULT_VARIABLE_CAP,
) -> Optional[Coupling]:
    """Find any coupling supported on the given (point, alternative) arcs.

    Returns ``None`` when no such coupling satisfies the primal constraints.
    """
    arcs = sorted(set(support))
    if not arcs:
        raise ValueError("support must be nonempty")
    n_alt = model.n_alternatives
    for i, x in arcs:
        if not (0 <= i < model.n_types and 0 <= x < n_alt):
            raise ValueError(f"arc ({i}, {x}) is outside the model")
    if len(arcs) > variable_cap:
        raise TooLarge(f"{len(arcs)} variables exceed the cap of {variable_cap}")

    columns = np.array([i * n_alt + x for i, x in arcs])
    eq, eq_rhs, ineq, ineq_rhs = _transport_lp_rows(model, columns)
    lp = StandardFormLP(
        objective=np.zeros(columns.shape[0]),
        eq_matrix=eq,
        eq_rhs=eq_rhs,
        ineq_matrix=ineq,
        ineq_rhs=ineq_rhs,
    )
    sol = solve_lp(lp)
    if sol.status is not LPStatus.OPTIMAL:
        return None
    mass = np.zeros((model.n_types, n_alt))
    for value, (i, x) in zip(sol.primal, arcs):
        mass[i, x] = max(value, 0.0)
    return Coupling(mass=mass)
