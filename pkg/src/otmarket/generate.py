"""Deterministic scenario generators.

Random goods-market scenarios are feasible by construction: the supply
vector is the goods-aggregate of an explicit random lottery profile, so the
induced coupling always satisfies every constraint.  Identical seeds yield
identical documents.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeOutOfRange
from .market_aww import GoodsEconomy, aww_surplus, enumerate_bundles
from .model import TypeCloud

MAX_GENERATED_GOODS = 6


def _monotonize_valuations(raw: np.ndarray, n_goods: int) -> np.ndarray:
    """Raise each bundle's value to at least the best of its sub-bundles."""
    values = raw.copy()
    for v in range(1, 2 ** n_goods):
        for g in range(n_goods):
            if (v >> g) & 1:
                sub = v & ~(1 << g)
                if sub:
                    values[:, v - 1] = np.maximum(values[:, v - 1], values[:, sub - 1])
    return values


def random_goods_economy(seed: int, n_types: int, n_goods: int) -> GoodsEconomy:
    """Random economy with monotone valuations and balanced, interior supply."""
    if n_types < 1:
        raise SizeOutOfRange(f"n_types must be >= 1, got {n_types}")
    if not 1 <= n_goods <= MAX_GENERATED_GOODS:
        raise SizeOutOfRange(
            f"n_goods must be in 1..{MAX_GENERATED_GOODS}, got {n_goods}"
        )
    rng = np.random.default_rng(seed)
    n_bundles = 2 ** n_goods

    raw = rng.uniform(0.0, 1.0, size=(n_types, n_bundles - 1))
    valuations = _monotonize_valuations(raw, n_goods)

    weights = rng.uniform(0.5, 1.5, size=n_types)
    weights = weights / weights.sum()

    # supply = goods-aggregate of a random lottery profile, blended with the
    # uniform lottery so every good's supply stays strictly interior
    lottery = rng.dirichlet(np.ones(n_bundles), size=n_types)
    lottery = 0.9 * lottery + 0.1 / n_bundles
    _, incidence = enumerate_bundles([f"g{j + 1}" for j in range(n_goods)])
    supply = incidence.values @ (weights @ lottery)

    cloud = TypeCloud(points=valuations, weights=weights)
    return GoodsEconomy(
        goods=tuple(f"g{j + 1}" for j in range(n_goods)),
        supply=supply,
        cloud=cloud,
    )


def economy_to_scenario(economy: GoodsEconomy) -> dict:
    """Scenario document of a goods economy (clearing rows as equalities)."""
    alts, incidence = enumerate_bundles(economy.goods)
    surplus = aww_surplus(economy)
    return {
        "points": [list(row) for row in economy.cloud.points],
        "weights": list(economy.cloud.weights),
        "alternatives": list(alts.labels),
        "surplus": [list(row) for row in surplus.values],
        "B": [list(row) for row in incidence.values],
        "b": list(economy.supply),
    }


def generate_random_scenario(seed: int, n_types: int, n_goods: int) -> dict:
    """Random goods-market scenario document; same seed, same bytes."""
    return economy_to_scenario(random_goods_economy(seed, n_types, n_goods))


def indifference_grid_economy(goods, n_types: int, supply) -> GoodsEconomy:
    """Demo economy: a uniform grid of types valuing every nonempty bundle
    equally at 1 + t with t on a midpoint grid of [0, 1].

    At equal per-good prices below the cheapest valuation, every type is
    indifferent among all single-good bundles, so market clearing is purely
    a question of splitting mass.
    """
    goods = tuple(str(g) for g in goods)
    if n_types < 1:
        raise SizeOutOfRange(f"n_types must be >= 1, got {n_types}")
    grid = (np.arange(n_types) + 0.5) / n_types
    valuations = np.repeat(
        (1.0 + grid)[:, None], 2 ** len(goods) - 1, axis=1
    )
    cloud = TypeCloud(points=valuations, weights=np.full(n_types, 1.0 / n_types))
    return GoodsEconomy(goods=goods, supply=np.asarray(supply, dtype=float), cloud=cloud)
