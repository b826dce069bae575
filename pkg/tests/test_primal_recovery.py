import math

import numpy as np
import pytest

from otmarket.dual_solver import PricePair, minimize_potential
from otmarket.errors import RecoveryFailed
from otmarket.lp_oracle import LPStatus, solve_discretized_primal
from otmarket.model import Coupling, coupling_surplus
from otmarket.primal_recovery import (
    active_arcs,
    duality_report,
    recover_primal,
)

from helpers import e1_model, e1_optimal_coupling, random_instance


class TestActiveArcs:
    def test_e1_interior_price(self):
        arcs = active_arcs(e1_model(), PricePair(p=[], q=[1.5]), 1e-9)
        assert arcs == {(0, 1), (1, 0)}

    def test_e1_boundary_price_adds_tie(self):
        arcs = active_arcs(e1_model(), PricePair(p=[], q=[1.0]), 1e-9)
        assert arcs == {(0, 1), (1, 0), (1, 1)}

    def test_infinite_eps_gives_all_arcs(self):
        model = e1_model()
        arcs = active_arcs(model, PricePair(p=[], q=[1.5]), math.inf)
        assert len(arcs) == model.n_types * model.n_alternatives

    def test_every_type_contributes(self):
        for seed in range(10):
            model, _ = random_instance(seed)
            arcs = active_arcs(model, PricePair.zeros(model.n_ineq, model.n_eq), 0.0)
            assert {i for i, _ in arcs} == set(range(model.n_types))


class TestRecoverPrimal:
    def test_e1_at_optimal_price(self):
        coupling = recover_primal(e1_model(), PricePair(p=[], q=[1.5]), [1e-9])
        assert coupling.mass[0, 1] == pytest.approx(0.5)
        assert coupling.mass[1, 0] == pytest.approx(0.5)

    def test_e1_far_price_fails(self):
        with pytest.raises(RecoveryFailed):
            recover_primal(e1_model(), PricePair(p=[], q=[0.0]), [1e-9])

    def test_infinite_eps_succeeds_iff_feasible(self):
        for seed in range(8):
            model, _ = random_instance(seed)
            prices = PricePair.zeros(model.n_ineq, model.n_eq)
            status = solve_discretized_primal(model).status
            if status is LPStatus.OPTIMAL:
                coupling = recover_primal(model, prices, [math.inf])
                assert coupling is not None
            else:
                with pytest.raises(RecoveryFailed):
                    recover_primal(model, prices, [math.inf])

    def test_rejects_bad_schedules(self):
        model = e1_model()
        with pytest.raises(ValueError):
            recover_primal(model, PricePair(p=[], q=[1.5]), [])
        with pytest.raises(ValueError):
            recover_primal(model, PricePair(p=[], q=[1.5]), [1e-3, 1e-9])


class TestDualityReport:
    def test_e1_optimal_pair_certifies(self):
        report = duality_report(
            e1_model(), e1_optimal_coupling(), PricePair(p=[], q=[1.5])
        )
        assert report.gap == pytest.approx(0.0, abs=1e-9)
        assert report.cs_ineq_residual == 0.0
        assert report.support_residual == pytest.approx(0.0, abs=1e-12)
        assert report.certified(1e-6)

    def test_e1_suboptimal_price_gap(self):
        report = duality_report(
            e1_model(), e1_optimal_coupling(), PricePair(p=[], q=[0.0])
        )
        assert report.gap == pytest.approx(0.5)
        assert not report.certified(1e-6)

    def test_zero_surplus_zero_gap(self):
        model, coupling = random_instance(2)
        from otmarket.model import SurplusMatrix, validate_scenario

        flat = validate_scenario(
            model.cloud,
            model.alternatives,
            SurplusMatrix(values=np.zeros_like(model.surplus.values)),
            model.constraints,
        )
        prices = PricePair.zeros(flat.n_ineq, flat.n_eq)
        report = duality_report(flat, coupling, prices)
        assert report.gap == pytest.approx(0.0, abs=1e-12)

    def test_weak_duality_in_every_report(self):
        rng = np.random.default_rng(23)
        for seed in range(15):
            model, coupling = random_instance(seed)
            from otmarket.dual_solver import price_box

            from helpers import random_box_prices

            prices = random_box_prices(model, price_box(model), rng)
            report = duality_report(model, coupling, prices)
            assert report.gap >= -1e-7


class TestRoundTrip:
    def test_recovery_at_oracle_duals_reproduces_value(self):
        for seed in range(15):
            model, _ = random_instance(seed + 40)
            lp = solve_discretized_primal(model)
            assert lp.status is LPStatus.OPTIMAL
            coupling = recover_primal(model, lp.prices)
            assert coupling_surplus(coupling, model) == pytest.approx(
                lp.value, abs=1e-6
            )

    def test_descent_then_recovery_certifies(self):
        for seed in (1, 4, 7):
            model, _ = random_instance(seed + 90)
            sol = minimize_potential(model)
            coupling = recover_primal(model, sol.prices)
            report = duality_report(model, coupling, sol.prices)
            assert report.feasibility.feasible
            assert report.gap <= 1e-2


def test_support_residual_tracks_carried_arcs():
    # put mass on a strictly suboptimal arc: the residual must flag it
    model = e1_model()
    bad = Coupling(mass=[[0.5, 0.0], [0.0, 0.5]])  # high type skips, low buys
    report = duality_report(model, bad, PricePair(p=[], q=[1.5]))
    assert report.support_residual == pytest.approx(0.5)
