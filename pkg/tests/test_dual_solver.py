import numpy as np
import pytest

from otmarket.dual_solver import (
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
from otmarket.errors import IndexOutOfRange, PricesOutsideK
from otmarket.lp_oracle import solve_discretized_primal
from otmarket.model import (
    AlternativeSet,
    ConstraintSystem,
    SurplusMatrix,
    TypeCloud,
    validate_scenario,
)

from helpers import e1_model, random_box_prices, random_instance


def _free_model(surplus_rows, n_eq_rows=None, b=None):
    """Model over one equality block (or none) with uniform weights."""
    n = len(surplus_rows)
    n_alt = len(surplus_rows[0])
    if n_eq_rows is None:
        cons = ConstraintSystem.empty(n_alt)
    else:
        cons = ConstraintSystem(
            A=np.zeros((0, n_alt)), a=[], B=n_eq_rows, b=b
        )
    return validate_scenario(
        TypeCloud(points=[[float(i)] for i in range(n)], weights=[1.0 / n] * n),
        AlternativeSet(labels=tuple(f"x{j}" for j in range(n_alt))),
        SurplusMatrix(values=surplus_rows),
        cons,
    )


class TestIndirectUtility:
    def test_single_equality_constraint(self):
        # net payoffs at q = 0.5 are (0, 1.5): the second alternative wins
        model = _free_model([[0.0, 2.0]], n_eq_rows=[[0.0, 1.0]], b=[0.5])
        row = indirect_utility(model, 0, PricePair(p=[], q=[0.5]))
        assert row.value == 1.5
        assert row.argmax_set == (1,)

    def test_zero_prices_pick_row_max(self):
        model = _free_model([[0.3, -1.0, 0.9]])
        row = indirect_utility(model, 0, PricePair.zeros(0, 0))
        assert row.value == 0.9
        assert row.argmax_set == (2,)

    def test_three_way_tie_at_zero_tol(self):
        # pricing both nonzero alternatives at exactly 1 levels all payoffs
        model = _free_model([[0.0, 1.0, 1.0]], n_eq_rows=[[0.0, 1.0, 1.0]], b=[0.5])
        row = indirect_utility(model, 0, PricePair(p=[], q=[1.0]), tie_tol=0.0)
        assert row.value == 0.0
        assert row.argmax_set == (0, 1, 2)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            indirect_utility(e1_model(), 5, PricePair(p=[], q=[0.0]))

    def test_feasibility_inequality(self):
        # value + alternative cost dominates every surplus entry
        rng = np.random.default_rng(5)
        for seed in range(10):
            model, _ = random_instance(seed)
            prices = random_box_prices(model, price_box(model), rng)
            costs = prices.stacked @ model.cost_columns
            for i in range(model.n_types):
                row = indirect_utility(model, i, prices)
                assert np.all(
                    row.value + costs >= model.surplus.values[i] - 1e-12
                )


class TestPotential:
    def test_e1_values(self):
        model = e1_model()
        assert potential(model, PricePair(p=[], q=[1.5])) == pytest.approx(1.0)
        assert potential(model, PricePair(p=[], q=[0.0])) == pytest.approx(1.5)

    def test_zero_everything(self):
        model = _free_model([[0.0, 0.0]], n_eq_rows=[[0.0, 1.0]], b=[0.0])
        assert potential(model, PricePair(p=[], q=[0.0])) == 0.0

    def test_negative_inequality_dual_rejected(self):
        with pytest.raises(PricesOutsideK):
            PricePair(p=[-0.1], q=[])


class TestSubgradient:
    def test_e1_excess_demand_sign(self):
        model = e1_model()
        assert subgradient(model, PricePair(p=[], q=[0.0])) == pytest.approx([-0.5])
        assert subgradient(model, PricePair(p=[], q=[3.0])) == pytest.approx([0.5])

    def test_zero_surplus_zero_bounds(self):
        model = _free_model([[0.0, 0.0]], n_eq_rows=[[0.0, 1.0]], b=[0.0])
        # lowest-index tie rule selects the unpriced alternative
        assert subgradient(model, PricePair(p=[], q=[0.0])) == pytest.approx([0.0])

    def test_subgradient_inequality(self):
        rng = np.random.default_rng(7)
        for seed in range(20):
            model, _ = random_instance(seed)
            box = price_box(model)
            for _ in range(5):
                x = random_box_prices(model, box, rng)
                y = random_box_prices(model, box, rng)
                g = subgradient(model, x)
                lhs = potential(model, y)
                rhs = potential(model, x) + g @ (y.stacked - x.stacked)
                assert lhs >= rhs - 1e-9

    def test_custom_tie_rule(self):
        model = _free_model([[1.0, 1.0]])
        g_low = subgradient(model, PricePair.zeros(0, 0), tie_rule=min)
        g_high = subgradient(model, PricePair.zeros(0, 0), tie_rule=max)
        assert g_low.shape == (0,) and g_high.shape == (0,)


class TestPriceBox:
    def test_unconstrained_box_is_empty(self):
        model = _free_model([[0.0, 0.0]])
        box = price_box(model)
        assert box.dimension == 0
        assert box.diameter == 0.0

    def test_e1_formula(self):
        box = price_box(e1_model())
        assert list(box.lower) == [-9.0]
        assert list(box.upper) == [9.0]

    def test_brackets_valuation_scale(self):
        # all valuations in [1, 2]: good prices above 2 kill demand and
        # prices below 0 make every bundle free, so the box must cover [0, 2]
        model = _free_model(
            [[0.0, 1.5, 1.5, 1.5], [0.0, 2.0, 2.0, 2.0]],
            n_eq_rows=[[0, 1, 0, 1], [0, 0, 1, 1]],
            b=[0.5, 0.5],
        )
        box = price_box(model)
        assert np.all(box.upper >= 2.0)
        assert np.all(box.lower <= 0.0)


class TestProjectToBox:
    def test_inside_unchanged(self):
        box = PriceBox(lower=[0.0, -2.0], upper=[3.0, 2.0])
        prices = PricePair(p=[1.0], q=[0.5])
        out = project_to_box(prices, box)
        assert list(out.stacked) == [1.0, 0.5]

    def test_clamps_both_sides(self):
        box = PriceBox(lower=[0.0, -9.0], upper=[3.0, 9.0])
        out = project_to_box(PricePair(p=[5.0], q=[100.0]), box)
        assert list(out.stacked) == [3.0, 9.0]

    def test_idempotent(self):
        box = PriceBox(lower=[0.0], upper=[1.0])
        once = project_to_box(PricePair(p=[], q=[4.0]), box)
        twice = project_to_box(once, box)
        assert list(once.stacked) == list(twice.stacked)


class TestMinimizePotential:
    def test_e1_analytic_minimum(self):
        sol = minimize_potential(e1_model())
        assert sol.potential_value == pytest.approx(1.0, abs=1e-4)
        assert 1.0 - 1e-3 <= sol.prices.q[0] <= 2.0 + 1e-3

    def test_unconstrained_is_trivial(self):
        model = _free_model([[0.0, 0.0]])
        sol = minimize_potential(model)
        assert sol.potential_value == 0.0
        assert sol.prices.stacked.shape == (0,)
        assert sol.iterations == 0

    def test_matches_oracle_on_random_instance(self):
        model, _ = random_instance(42, max_types=20, max_alts=4)
        lp = solve_discretized_primal(model)
        sol = minimize_potential(model)
        rel = abs(sol.potential_value - lp.value) / max(1.0, abs(lp.value))
        assert rel <= 1e-3

    def test_trace_records_descent(self):
        sol = minimize_potential(
            e1_model(), SolverOptions(max_iters=50, keep_trace=True)
        )
        assert sol.trace is not None
        assert sol.trace[0][0] == 0
        values = [row[1] for row in sol.trace]
        assert min(values) == pytest.approx(sol.potential_value)

    def test_polyak_step_reaches_known_target(self):
        model = e1_model()
        sol = minimize_potential(
            model,
            SolverOptions(
                max_iters=10000, step_rule="polyak", polyak_target=1.0
            ),
        )
        assert sol.potential_value == pytest.approx(1.0, abs=1e-9)

    def test_best_value_recomputes(self):
        for seed in range(5):
            model, _ = random_instance(seed)
            sol = minimize_potential(model, SolverOptions(max_iters=200))
            assert potential(model, sol.prices) == pytest.approx(
                sol.potential_value, abs=1e-9
            )
            box = price_box(model)
            assert np.all(sol.prices.stacked >= box.lower - 1e-12)
            assert np.all(sol.prices.stacked <= box.upper + 1e-12)


class TestConvexityAndDuality:
    def test_convexity_along_segments(self):
        rng = np.random.default_rng(13)
        for seed in range(20):
            model, _ = random_instance(seed)
            box = price_box(model)
            for _ in range(5):
                x = random_box_prices(model, box, rng)
                y = random_box_prices(model, box, rng)
                lam = rng.uniform()
                mid = PricePair.from_stacked(
                    lam * x.stacked + (1 - lam) * y.stacked, model.n_ineq
                )
                assert potential(model, mid) <= (
                    lam * potential(model, x)
                    + (1 - lam) * potential(model, y)
                    + 1e-9
                )

    def test_weak_duality_against_feasible_couplings(self):
        from otmarket.model import coupling_surplus

        rng = np.random.default_rng(17)
        for seed in range(20):
            model, coupling = random_instance(seed)
            box = price_box(model)
            for _ in range(5):
                prices = random_box_prices(model, box, rng)
                assert coupling_surplus(coupling, model) <= (
                    potential(model, prices) + 1e-9
                )

    def test_box_enlargement_preserves_grid_minimum(self):
        # grid minima over the box and a doubled box agree up to the grid
        # resolution times the potential's Lipschitz scale
        for seed in (3, 9):
            model, _ = random_instance(seed, max_alts=4, allow_ineq=False)
            if model.n_prices == 0 or model.n_prices > 2:
                continue
            box = price_box(model)
            big = PriceBox(lower=2.0 * box.lower, upper=2.0 * box.upper)

            def grid_min(b, points=33):
                axes = [
                    np.linspace(b.lower[d], b.upper[d], points)
                    for d in range(b.dimension)
                ]
                mesh = np.meshgrid(*axes, indexing="ij")
                stacked = np.stack([m.ravel() for m in mesh], axis=1)
                return min(
                    potential(
                        model, PricePair.from_stacked(v, model.n_ineq)
                    )
                    for v in stacked
                ), max(
                    (b.upper[d] - b.lower[d]) / (points - 1)
                    for d in range(b.dimension)
                )

            small_min, h_small = grid_min(box)
            big_min, h_big = grid_min(big)
            lipschitz = float(
                np.abs(model.cost_columns).sum(axis=0).max()
                + np.linalg.norm(
                    np.concatenate(
                        [model.constraints.a, model.constraints.b]
                    )
                )
            )
            slack = lipschitz * (h_small + h_big) * model.n_prices
            assert abs(small_min - big_min) <= slack
