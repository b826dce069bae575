"""End-to-end runs shared by the HTTP service and the command line.

Each function takes validated core objects and returns a plain dict shaped
like the emitted JSON report, so the two front ends stay thin and agree on
the wire format.  Reports carry the tolerances they were produced with.
"""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np

from .dual_solver import DualSolution, PricePair, SolverOptions, minimize_potential
from .errors import DimensionMismatch
from .generate import economy_to_scenario  # noqa: F401  (re-export for callers)
from .lp_oracle import LPStatus, solve_discretized_primal
from .market_aww import (
    GoodsEconomy,
    build_market_model,
    dyadic_l1_distance,
    enumerate_bundles,
    extract_allocation,
    tatonnement,
    verify_equilibrium,
)
from .model import Coupling, TypeCloud, ValidatedModel
from .primal_recovery import (
    DEFAULT_EPS_SCHEDULE,
    DEFAULT_FEAS_TOL,
    DEFAULT_GAP_TOL,
    duality_report,
    recover_primal,
)

DEFAULT_CLI_GAP_TOL = 1e-3


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def coupling_to_triplets(coupling: Coupling) -> list[list]:
    rows, cols = np.nonzero(coupling.mass)
    return [
        [int(i), int(x), float(coupling.mass[i, x])] for i, x in zip(rows, cols)
    ]


def triplets_to_coupling(triplets, n_types: int, n_alternatives: int) -> Coupling:
    mass = np.zeros((n_types, n_alternatives))
    for entry in triplets:
        i, x, value = int(entry[0]), int(entry[1]), float(entry[2])
        if not (0 <= i < n_types and 0 <= x < n_alternatives):
            raise DimensionMismatch(f"triplet ({i}, {x}) is outside the model")
        mass[i, x] = value
    return Coupling(mass=mass)


def prices_to_dict(prices: PricePair) -> dict:
    return {"p": list(prices.p), "q": list(prices.q)}


def solution_to_dict(solution: DualSolution) -> dict:
    return {
        "prices": prices_to_dict(solution.prices),
        "potential_value": solution.potential_value,
        "iterations": solution.iterations,
        "subgradient_norm_at_best": solution.subgradient_norm_at_best,
    }


def run_solve(
    model: ValidatedModel,
    options: SolverOptions = SolverOptions(),
    gap_tol: float = DEFAULT_CLI_GAP_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
) -> dict:
    """Minimize the potential, recover a coupling, and certify the pair."""
    solution = minimize_potential(model, options)
    coupling = recover_primal(model, solution.prices, DEFAULT_EPS_SCHEDULE)
    report = duality_report(model, coupling, solution.prices, feas_tol=feas_tol)
    return {
        "subcommand": "solve",
        "generated_at": _timestamp(),
        "solver": solution_to_dict(solution),
        "coupling": {"triplets": coupling_to_triplets(coupling)},
        "report": report.as_dict(),
        "certified": report.certified(gap_tol),
        "gap_tol": gap_tol,
        "feas_tol": feas_tol,
        "trace": [list(row) for row in solution.trace]
        if solution.trace is not None
        else None,
    }


def run_oracle(model: ValidatedModel) -> dict:
    """Solve the discretized primal directly and emit value, coupling, duals."""
    result = solve_discretized_primal(model)
    doc = {
        "subcommand": "oracle",
        "generated_at": _timestamp(),
        "status": result.status.value,
    }
    if result.status is LPStatus.OPTIMAL:
        doc["value"] = result.value
        doc["coupling"] = {"triplets": coupling_to_triplets(result.coupling)}
        doc["duals"] = {
            "p": list(result.prices.p),
            "q": list(result.prices.q),
            "type_potentials": list(result.type_potentials),
        }
    return doc


def run_verify(
    model: ValidatedModel,
    coupling: Coupling,
    prices: PricePair,
    gap_tol: float = DEFAULT_GAP_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
) -> dict:
    """Duality report for an externally supplied (coupling, prices) pair."""
    report = duality_report(model, coupling, prices, feas_tol=feas_tol)
    return {
        "subcommand": "verify",
        "generated_at": _timestamp(),
        "report": report.as_dict(),
        "certified": report.certified(gap_tol),
        "gap_tol": gap_tol,
        "feas_tol": feas_tol,
    }


def economy_from_model(model: ValidatedModel) -> GoodsEconomy:
    """Reinterpret a goods-shaped scenario as an economy.

    The scenario must have no inequality block and an equality block that is
    exactly the bundle/good incidence in binary counting order; the surplus
    columns after the empty bundle supply the valuations.
    """
    if model.n_ineq:
        raise DimensionMismatch(
            "a goods scenario must not carry inequality constraints"
        )
    n_goods = model.n_eq
    if n_goods < 1 or model.n_alternatives != 2 ** n_goods:
        raise DimensionMismatch(
            f"expected 2^{n_goods} alternatives for {n_goods} goods, "
            f"got {model.n_alternatives}"
        )
    goods = tuple(f"g{j + 1}" for j in range(n_goods))
    _, incidence = enumerate_bundles(goods)
    if not np.array_equal(model.constraints.B, incidence.values):
        raise DimensionMismatch(
            "equality block is not the bundle incidence in binary counting order"
        )
    if np.any(model.surplus.values[:, 0] != 0.0):
        raise DimensionMismatch("the empty bundle must have zero surplus")
    cloud = TypeCloud(
        points=model.surplus.values[:, 1:], weights=model.cloud.weights
    )
    return GoodsEconomy(goods=goods, supply=model.constraints.b, cloud=cloud)


def run_equilibrium(
    economy: GoodsEconomy,
    options: SolverOptions = SolverOptions(),
    gap_tol: float = DEFAULT_CLI_GAP_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
    eq_tol: float = 1e-3,
) -> dict:
    """Tatonnement, coupling recovery, allocation, and equilibrium checks."""
    model = build_market_model(economy)
    solution = tatonnement(economy, options)
    coupling = recover_primal(model, solution.prices, DEFAULT_EPS_SCHEDULE)
    report = duality_report(model, coupling, solution.prices, feas_tol=feas_tol)
    lottery = extract_allocation(coupling, model.cloud)
    eq_report = verify_equilibrium(economy, lottery, solution.prices.q, eq_tol)
    return {
        "subcommand": "equilibrium",
        "generated_at": _timestamp(),
        "goods": list(economy.goods),
        "prices": {g: float(v) for g, v in zip(economy.goods, solution.prices.q)},
        "per_good_excess_demand": {
            g: float(v) for g, v in zip(economy.goods, eq_report.per_good_excess)
        },
        "potential_value": solution.potential_value,
        "iterations": solution.iterations,
        "report": report.as_dict(),
        "equilibrium": eq_report.as_dict(),
        "certified": report.certified(gap_tol) and eq_report.ok,
        "gap_tol": gap_tol,
        "feas_tol": feas_tol,
        "eq_tol": eq_tol,
        "trace": [list(row) for row in solution.trace]
        if solution.trace is not None
        else None,
    }


def counterexample_rows(max_level: int) -> list[dict]:
    """Exact pairwise distances between dyadic step allocations."""
    if max_level < 2:
        raise ValueError("max_level must be >= 2 to form a pair")
    rows = []
    for n in range(1, max_level + 1):
        for m in range(n + 1, max_level + 1):
            rows.append({"n": n, "m": m, "distance": dyadic_l1_distance(n, m)})
    return rows
