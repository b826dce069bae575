"""Markets with indivisible goods: bundles, demand, tatonnement, allocations.

A goods economy assigns each type a valuation per nonempty bundle (the empty
bundle is worth zero).  Market clearing is expressed through the bundle/good
incidence matrix, so the whole economy is a transport scenario with one
equality constraint per good; tatonnement is projected subgradient descent
on the resulting potential, adjusting each good's price against its excess
demand.

The module also builds the alternating dyadic step allocations on [0, 1)
and measures their pairwise L1 distances in exact integer arithmetic:
distinct levels are always at distance exactly one, so the family has no
Cauchy subsequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .dual_solver import (
    DEFAULT_TIE_TOL,
    DualSolution,
    SolverOptions,
    minimize_potential,
)
from .errors import (
    DimensionMismatch,
    LevelOutOfRange,
    MarginalMismatch,
    ShapeMismatch,
    SupplyOutOfRange,
    TooManyGoods,
)
from .model import (
    AlternativeSet,
    ConstraintSystem,
    Coupling,
    SurplusMatrix,
    TypeCloud,
    ValidatedModel,
    validate_scenario,
)

MAX_GOODS = 12
MAX_DYADIC_LEVEL = 30


@dataclass(frozen=True)
class GoodsEconomy:
    """Finite sample of buyers over bundles of indivisible goods."""

    goods: tuple[str, ...]
    supply: np.ndarray  # (|G|,), each strictly inside (0, 1)
    cloud: TypeCloud  # valuation vectors of dimension 2^|G| - 1

    def __post_init__(self):
        goods = tuple(str(g) for g in self.goods)
        supply = np.array(np.atleast_1d(self.supply), dtype=float)
        if len(goods) < 1:
            raise DimensionMismatch("economy needs at least one good")
        if len(set(goods)) != len(goods):
            raise DimensionMismatch("good labels must be distinct")
        if supply.shape != (len(goods),):
            raise DimensionMismatch("supply must have one entry per good")
        if np.any(supply <= 0) or np.any(supply >= 1):
            raise SupplyOutOfRange(f"supply must lie strictly in (0, 1), got {supply}")
        expected_dim = 2 ** len(goods) - 1
        if self.cloud.dimension != expected_dim:
            raise DimensionMismatch(
                f"valuations must have dimension {expected_dim} "
                f"(one per nonempty bundle), got {self.cloud.dimension}"
            )
        supply.setflags(write=False)
        object.__setattr__(self, "goods", goods)
        object.__setattr__(self, "supply", supply)

    @property
    def n_goods(self) -> int:
        return len(self.goods)

    @property
    def n_bundles(self) -> int:
        return 2 ** self.n_goods


@dataclass(frozen=True)
class IncidenceMatrix:
    """Zero-one matrix mapping each bundle column to the goods it contains."""

    values: np.ndarray  # (|G|, 2^|G|)

    def __post_init__(self):
        arr = np.array(np.atleast_2d(self.values), dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class AllocationLottery:
    """Per-type probability distribution over bundles."""

    probabilities: np.ndarray  # (n, |X|)

    def __post_init__(self):
        arr = np.array(np.atleast_2d(self.probabilities), dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "probabilities", arr)


@dataclass(frozen=True)
class EquilibriumReport:
    """Residuals of the two equilibrium conditions at a price vector."""

    supply_residual: float
    utility_residual: float
    per_good_excess: np.ndarray  # aggregate demand minus supply, per good
    ok: bool
    tol: float

    def as_dict(self) -> dict:
        return {
            "supply_residual": self.supply_residual,
            "utility_residual": self.utility_residual,
            "per_good_excess": [float(v) for v in self.per_good_excess],
            "ok": self.ok,
            "tol": self.tol,
        }


def enumerate_bundles(goods) -> tuple[AlternativeSet, IncidenceMatrix]:
    """All bundles over the goods, in binary counting order (empty first).

    Bundle v contains good g iff bit g of v is set; labels are bit strings
    with one character per good, in goods order.
    """
    goods = tuple(str(g) for g in goods)
    if not 1 <= len(goods) <= MAX_GOODS:
        raise TooManyGoods(f"need 1..{MAX_GOODS} goods, got {len(goods)}")
    n_goods = len(goods)
    n_bundles = 2 ** n_goods
    labels = tuple(
        "".join("1" if (v >> g) & 1 else "0" for g in range(n_goods))
        for v in range(n_bundles)
    )
    incidence = np.zeros((n_goods, n_bundles))
    for v in range(n_bundles):
        for g in range(n_goods):
            incidence[g, v] = (v >> g) & 1
    return AlternativeSet(labels=labels), IncidenceMatrix(values=incidence)


def aww_surplus(economy: GoodsEconomy) -> SurplusMatrix:
    """Surplus table of the economy: the empty bundle is worth zero, every
    other column copies the matching valuation coordinate."""
    n = economy.cloud.n_points
    values = np.zeros((n, economy.n_bundles))
    values[:, 1:] = economy.cloud.points
    return SurplusMatrix(values=values)


def demand(
    valuation_row, prices, tie_tol: float = DEFAULT_TIE_TOL
) -> tuple[int, ...]:
    """Payoff-maximizing bundle indices at the given per-good prices.

    Never empty: the empty bundle always offers payoff zero.
    """
    valuations = np.asarray(valuation_row, dtype=float).ravel()
    p = np.asarray(prices, dtype=float).ravel()
    n_goods = p.shape[0]
    n_bundles = 2 ** n_goods
    if valuations.shape[0] != n_bundles - 1:
        raise DimensionMismatch(
            f"expected {n_bundles - 1} valuations for {n_goods} goods, "
            f"got {valuations.shape[0]}"
        )
    _, incidence = enumerate_bundles([str(g) for g in range(n_goods)])
    net = np.concatenate([[0.0], valuations]) - p @ incidence.values
    best = float(net.max())
    return tuple(int(v) for v in np.flatnonzero(net >= best - tie_tol))


def build_market_model(economy: GoodsEconomy) -> ValidatedModel:
    """Transport scenario of the economy: market clearing as equality rows."""
    alts, incidence = enumerate_bundles(economy.goods)
    cons = ConstraintSystem(
        A=np.zeros((0, economy.n_bundles)),
        a=np.zeros(0),
        B=incidence.values,
        b=economy.supply,
    )
    return validate_scenario(economy.cloud, alts, aww_surplus(economy), cons)


def tatonnement(
    economy: GoodsEconomy, options: SolverOptions = SolverOptions()
) -> DualSolution:
    """Equilibrium price search by excess-demand descent on the potential."""
    return minimize_potential(build_market_model(economy), options)


def extract_allocation(coupling: Coupling, cloud: TypeCloud) -> AllocationLottery:
    """Per-type bundle lotteries of a coupling: each row divided by its mass.

    Requires the coupling's type marginal to match the cloud weights to 1e-8;
    rows of the result sum to one.
    """
    if coupling.mass.shape[0] != cloud.n_points:
        raise ShapeMismatch(
            f"coupling has {coupling.mass.shape[0]} rows, cloud has "
            f"{cloud.n_points} points"
        )
    row_mass = coupling.mass.sum(axis=1)
    residual = float(np.max(np.abs(row_mass - cloud.weights)))
    if residual > 1e-8:
        raise MarginalMismatch(
            f"type marginal is off by {residual:.3e} (tolerance 1e-8)"
        )
    return AllocationLottery(probabilities=coupling.mass / cloud.weights[:, None])


def verify_equilibrium(
    economy: GoodsEconomy,
    lottery: AllocationLottery,
    prices,
    tol: float,
) -> EquilibriumReport:
    """Check market clearing and individual optimality of a lottery profile.

    Condition (i): per-good aggregate demand matches supply within tol.
    Condition (ii): every bundle carrying lottery weight above tol is within
    tol of the type's best payoff (the support threshold equals tol because
    recovered couplings carry solver-level noise).
    """
    p = np.asarray(prices, dtype=float).ravel()
    if p.shape != (economy.n_goods,):
        raise ShapeMismatch(f"expected {economy.n_goods} prices, got {p.shape}")
    probs = lottery.probabilities
    if probs.shape != (economy.cloud.n_points, economy.n_bundles):
        raise ShapeMismatch(
            f"lottery must be {economy.cloud.n_points}x{economy.n_bundles}, "
            f"got {probs.shape}"
        )

    _, incidence = enumerate_bundles(economy.goods)
    aggregate = incidence.values @ (economy.cloud.weights @ probs)
    excess = aggregate - economy.supply
    supply_residual = float(np.max(np.abs(excess)))

    net = np.hstack(
        [np.zeros((economy.cloud.n_points, 1)), economy.cloud.points]
    ) - (p @ incidence.values)[None, :]
    suboptimality = net.max(axis=1, keepdims=True) - net
    carried = probs > tol
    utility_residual = (
        float(np.max(suboptimality[carried])) if carried.any() else 0.0
    )

    return EquilibriumReport(
        supply_residual=supply_residual,
        utility_residual=utility_residual,
        per_good_excess=excess,
        ok=supply_residual <= tol and utility_residual <= tol,
        tol=tol,
    )


# --- alternating dyadic allocations -------------------------------------

BUNDLE_FIRST_ONLY = (1, 0)
BUNDLE_SECOND_ONLY = (0, 1)


def _check_level(n: int) -> None:
    if not 1 <= n <= MAX_DYADIC_LEVEL:
        raise LevelOutOfRange(f"level must be in 1..{MAX_DYADIC_LEVEL}, got {n}")


@dataclass(frozen=True)
class DyadicAllocation:
    """Step allocation on [0, 1) at resolution 2^-level.

    Cells [k/2^n, (k+1)/2^n) with odd k get the first single-good bundle,
    even cells the second; no mass ever sits on the empty or the full bundle.
    """

    level: int

    def __post_init__(self):
        _check_level(self.level)

    @property
    def n_cells(self) -> int:
        return 2 ** self.level

    def bundle_at(self, t) -> tuple[int, int]:
        """Bundle consumed at point t of [0, 1)."""
        t = Fraction(t)
        if not 0 <= t < 1:
            raise ValueError("t must lie in [0, 1)")
        cell = int(t * self.n_cells)
        return BUNDLE_FIRST_ONLY if cell % 2 == 1 else BUNDLE_SECOND_ONLY

    def intervals(self, bundle: tuple[int, int]) -> Iterator[tuple[Fraction, Fraction]]:
        """Half-open dyadic intervals on which the given bundle is consumed."""
        if bundle not in (BUNDLE_FIRST_ONLY, BUNDLE_SECOND_ONLY):
            return
        want_odd = bundle == BUNDLE_FIRST_ONLY
        denom = self.n_cells
        for k in range(denom):
            if (k % 2 == 1) == want_odd:
                yield Fraction(k, denom), Fraction(k + 1, denom)

    def aggregate_demand(self) -> tuple[Fraction, Fraction]:
        """Exact per-good consumed mass: always (1/2, 1/2).

        Good 1 is consumed exactly on the odd cells and good 2 on the even
        cells; each parity class holds half of the 2^n cells.
        """
        odd_cells = self.n_cells // 2
        share = Fraction(odd_cells, self.n_cells)
        return share, 1 - share


def dyadic_allocation(n: int) -> DyadicAllocation:
    """The level-n alternating step allocation."""
    return DyadicAllocation(level=n)


def dyadic_l1_distance(n: int, m: int) -> Fraction:
    """Exact L1 distance between the level-n and level-m step allocations.

    Within each coarse cell the finer allocation alternates over an even
    number of subintervals, so exactly half of them disagree with the
    coarse value; each disagreeing point contributes 1 on both single-good
    coordinates.  The count is carried out in exact integer arithmetic:
    the distance is 0 for n = m and exactly 1 otherwise.
    """
    _check_level(n)
    _check_level(m)
    if n == m:
        return Fraction(0)
    coarse, fine = min(n, m), max(n, m)
    cells = 2 ** coarse
    sub_per_cell = 2 ** (fine - coarse)
    # per coarse cell: subintervals whose fine parity differs from the
    # coarse cell's parity -- exactly half of an even count, whatever the
    # cell's own parity
    disagreeing_per_cell = sub_per_cell // 2
    disagree_measure = Fraction(cells * disagreeing_per_cell, 2 ** fine)
    return 2 * disagree_measure
