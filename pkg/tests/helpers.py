"""Shared instance builders for the test suite.

Random instances are feasible by construction: the equality bounds are the
alternative marginal of an explicit lottery coupling and the inequality
bounds sit strictly above it.
"""

import numpy as np

from otmarket.market_aww import GoodsEconomy
from otmarket.model import (
    AlternativeSet,
    ConstraintSystem,
    Coupling,
    SurplusMatrix,
    TypeCloud,
    validate_scenario,
)

# Two types (valuations 2 and 1, equal mass) and a single good with supply
# one half.  Optimal value 1.0: the high type buys.  Hand enumeration: the
# buy column must carry mass exactly 0.5 split as (m, 0.5 - m) over the two
# types, so the surplus is 2m + (0.5 - m) = 0.5 + m, maximized at m = 0.5.
E1_POINTS = [[2.0], [1.0]]
E1_WEIGHTS = [0.5, 0.5]
E1_SURPLUS = [[0.0, 2.0], [0.0, 1.0]]
E1_SUPPLY = 0.5
E1_VALUE = 1.0


def e1_model():
    return validate_scenario(
        TypeCloud(points=E1_POINTS, weights=E1_WEIGHTS),
        AlternativeSet(labels=("skip", "buy")),
        SurplusMatrix(values=E1_SURPLUS),
        ConstraintSystem(
            A=np.zeros((0, 2)), a=[], B=[[0.0, 1.0]], b=[E1_SUPPLY]
        ),
    )


def e1_economy():
    return GoodsEconomy(
        goods=("g1",),
        supply=[E1_SUPPLY],
        cloud=TypeCloud(points=E1_POINTS, weights=E1_WEIGHTS),
    )


def e1_optimal_coupling():
    return Coupling(mass=[[0.0, 0.5], [0.5, 0.0]])


def e1_scenario_doc():
    return {
        "points": E1_POINTS,
        "weights": E1_WEIGHTS,
        "alternatives": ["skip", "buy"],
        "surplus": E1_SURPLUS,
        "B": [[0.0, 1.0]],
        "b": [E1_SUPPLY],
    }


def random_instance(seed, max_types=20, max_alts=6, allow_ineq=True):
    """Random scenario plus a coupling that satisfies all its constraints."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_types + 1))
    n_alt = int(rng.integers(2, max_alts + 1))
    phi = rng.uniform(-1.0, 2.0, size=(n, n_alt))
    weights = rng.uniform(0.5, 1.5, size=n)
    weights = weights / weights.sum()

    lottery = rng.dirichlet(np.ones(n_alt), size=n)
    pi_hat = weights[:, None] * lottery
    alt_marginal = pi_hat.sum(axis=0)

    k = int(rng.integers(0, 3)) if allow_ineq else 0
    n_eq = int(rng.integers(0, 3))
    A = rng.uniform(-1.0, 1.0, size=(k, n_alt))
    a = A @ alt_marginal + rng.uniform(0.05, 0.5, size=k)
    B = rng.uniform(-1.0, 1.0, size=(n_eq, n_alt))
    b = B @ alt_marginal

    model = validate_scenario(
        TypeCloud(points=rng.normal(size=(n, 2)), weights=weights),
        AlternativeSet(labels=tuple(f"x{j}" for j in range(n_alt))),
        SurplusMatrix(values=phi),
        ConstraintSystem(A=A, a=a, B=B, b=b),
    )
    return model, Coupling(mass=pi_hat)


def random_box_prices(model, box, rng):
    """Uniform draw from the model's price box."""
    from otmarket.dual_solver import PricePair

    if box.dimension == 0:
        return PricePair.zeros(0, 0)
    vec = rng.uniform(box.lower, box.upper)
    return PricePair.from_stacked(vec, model.n_ineq)
