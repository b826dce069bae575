"""Coupling recovery from near-optimal prices, and duality certification.

An optimal coupling only puts mass on arcs whose net payoff is maximal for
their type.  Given prices from the descent, we collect arcs within an
escalating tolerance of each type's best payoff and ask the feasibility
oracle for a coupling supported there; the duality report then quantifies
how good the resulting (coupling, prices) pair actually is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dual_solver import PricePair, _check_prices, _net_payoffs, potential
from .errors import RecoveryFailed
from .lp_oracle import feasibility_on_support
from .model import (
    Coupling,
    FeasibilityReport,
    ValidatedModel,
    check_primal_feasibility,
    coupling_surplus,
    marginals,
)

DEFAULT_EPS_SCHEDULE = (1e-9, 1e-7, 1e-5, 1e-3)
DEFAULT_FEAS_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-6


@dataclass(frozen=True)
class DualityReport:
    """Certificate data for a (coupling, prices) pair.

    ``gap`` is dual minus primal value; weak duality keeps it above -1e-7.
    ``cs_ineq_residual`` measures complementary slackness on the inequality
    block; ``support_residual`` is the worst suboptimality of an arc that
    actually carries mass.
    """

    primal_value: float
    dual_value: float
    gap: float
    cs_ineq_residual: float
    support_residual: float
    feasibility: FeasibilityReport

    def certified(self, gap_tol: float = DEFAULT_GAP_TOL) -> bool:
        return self.feasibility.feasible and self.gap <= gap_tol

    def as_dict(self) -> dict:
        return {
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "cs_ineq_residual": self.cs_ineq_residual,
            "support_residual": self.support_residual,
            "feasibility": self.feasibility.as_dict(),
        }


def active_arcs(
    model: ValidatedModel, prices: PricePair, eps: float
) -> set[tuple[int, int]]:
    """Arcs whose net payoff is within eps of their type's best payoff.

    Every type contributes at least one arc (its maximizer).
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    _check_prices(model, prices)
    net = _net_payoffs(model, prices.stacked)
    best = net.max(axis=1, keepdims=True)
    if math.isinf(eps):
        mask = np.ones_like(net, dtype=bool)
    else:
        mask = net >= best - eps
    return {(int(i), int(x)) for i, x in zip(*np.nonzero(mask))}


def recover_primal(
    model: ValidatedModel,
    prices: PricePair,
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
) -> Coupling:
    """First feasible coupling supported on eps-active arcs, widening eps.

    Ties are resolved by the feasibility oracle itself: it may spread a
    type's mass across all of its active arcs, realizing any needed lottery.

    Raises:
        RecoveryFailed: no eps in the schedule yields a feasible support,
            which signals that the prices are far from optimal.
    """
    schedule = list(eps_schedule)
    if not schedule:
        raise ValueError("eps_schedule must be nonempty")
    if any(b < a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("eps_schedule must be increasing")
    for eps in schedule:
        support = active_arcs(model, prices, eps)
        coupling = feasibility_on_support(model, support)
        if coupling is not None:
            return coupling
    raise RecoveryFailed(
        f"no feasible coupling on active arcs up to eps={schedule[-1]!r}"
    )


def duality_report(
    model: ValidatedModel,
    coupling: Coupling,
    prices: PricePair,
    feas_tol: float = DEFAULT_FEAS_TOL,
) -> DualityReport:
    """Evaluate a (coupling, prices) pair: values, gap, and slackness residuals."""
    primal = coupling_surplus(coupling, model)
    dual = potential(model, prices)

    _, alt_marginal = marginals(coupling, model)
    cons = model.constraints
    if cons.n_ineq:
        slack = cons.a - cons.A @ alt_marginal
        cs_res = float(np.max(np.abs(prices.p * slack)))
    else:
        cs_res = 0.0

    net = _net_payoffs(model, prices.stacked)
    best = net.max(axis=1, keepdims=True)
    carried = coupling.mass > 0
    if carried.any():
        support_res = float(np.max((best - net)[carried]))
    else:
        support_res = 0.0

    return DualityReport(
        primal_value=primal,
        dual_value=dual,
        gap=dual - primal,
        cs_ineq_residual=cs_res,
        support_residual=max(support_res, 0.0),
        feasibility=check_primal_feasibility(coupling, model, feas_tol),
    )
