"""Constrained semi-discrete transport: duality, recovery, and market tooling."""

from .dual_solver import (
    DualSolution,
    PriceBox,
    PricePair,
    SolverOptions,
    indirect_utility,
    minimize_potential,
    potential,
    price_box,
    project_to_box,
    subgradient,
)
from .lp_oracle import (
    DiscretePrimalSolution,
    LPSolution,
    LPStatus,
    StandardFormLP,
    feasibility_on_support,
    solve_discretized_primal,
    solve_lp,
)
from .market_aww import (
    AllocationLottery,
    DyadicAllocation,
    GoodsEconomy,
    IncidenceMatrix,
    aww_surplus,
    demand,
    dyadic_allocation,
    dyadic_l1_distance,
    enumerate_bundles,
    extract_allocation,
    tatonnement,
    verify_equilibrium,
)
from .model import (
    AlternativeSet,
    ConstraintSystem,
    Coupling,
    FeasibilityReport,
    SurplusMatrix,
    TypeCloud,
    ValidatedModel,
    check_primal_feasibility,
    coupling_surplus,
    marginals,
    validate_scenario,
)
from .primal_recovery import (
    DualityReport,
    active_arcs,
    duality_report,
    recover_primal,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationLottery",
    "AlternativeSet",
    "ConstraintSystem",
    "Coupling",
    "DiscretePrimalSolution",
    "DualSolution",
    "DualityReport",
    "DyadicAllocation",
    "FeasibilityReport",
    "GoodsEconomy",
    "IncidenceMatrix",
    "LPSolution",
    "LPStatus",
    "PriceBox",
    "PricePair",
    "SolverOptions",
    "StandardFormLP",
    "SurplusMatrix",
    "TypeCloud",
    "ValidatedModel",
    "active_arcs",
    "aww_surplus",
    "check_primal_feasibility",
    "coupling_surplus",
    "demand",
    "duality_report",
    "dyadic_allocation",
    "dyadic_l1_distance",
    "enumerate_bundles",
    "extract_allocation",
    "feasibility_on_support",
    "indirect_utility",
    "marginals",
    "minimize_potential",
    "potential",
    "price_box",
    "project_to_box",
    "recover_primal",
    "solve_discretized_primal",
    "solve_lp",
    "subgradient",
    "tatonnement",
    "validate_scenario",
    "verify_equilibrium",
]
