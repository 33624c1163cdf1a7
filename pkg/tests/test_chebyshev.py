"""Bessel coefficients, truncation order selection, and the leap propagator."""

import math

import numpy as np
import pytest

import oracles
from spinbath import chebyshev
from spinbath.model import energy_bound_e1

# frozen reference values, computed from the alternating power series
J0_AT_1 = 0.7651976865579666
J1_AT_1 = 0.4400505857449335


class TestBesselSequence:
    def test_frozen_values_at_one(self):
        seq = chebyshev.bessel_sequence(1.0, 1)
        assert seq[0] == pytest.approx(J0_AT_1, abs=1e-15)
        assert seq[1] == pytest.approx(J1_AT_1, abs=1e-15)

    @pytest.mark.parametrize("tau", [0.3, 2.0, 7.3, 25.0, 120.0])
    def test_against_power_series(self, tau):
        k_max = 12
        seq = chebyshev.bessel_sequence(tau, k_max)
        for k in range(k_max + 1):
            assert seq[k] == pytest.approx(oracles.bessel_series(k, tau),
                                           abs=1e-14)

    @pytest.mark.parametrize("tau", [0.1, 1.0, 14.0, 300.0])
    def test_even_order_normalization(self, tau):
        # J_0 + 2 sum_j J_2j = 1 once the order clears the decay transition
        seq = chebyshev.bessel_sequence(tau, int(1.5 * tau) + 60)
        total = seq[0] + 2.0 * seq[2::2].sum()
        assert total == pytest.approx(1.0, abs=1e-13)

    def test_zero_argument(self):
        seq = chebyshev.bessel_sequence(0.0, 5)
        assert np.array_equal(seq, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0])

    def test_deep_tail_does_not_underflow_to_garbage(self):
        # far beyond the turning point the values are tiny but finite
        seq = chebyshev.bessel_sequence(5.0, 120)
        assert np.isfinite(seq).all()
        assert abs(seq[119]) < 1e-100

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            chebyshev.bessel_sequence(-1.0, 5)
        with pytest.raises(ValueError):
            chebyshev.bessel_sequence(1.0, -1)


class TestExpansionOrder:
    def test_tighter_epsilon_needs_more_terms(self):
        for tau in (10.0, 50.0, 100.0, 300.0):
            assert chebyshev.expansion_order(tau, 1e-6) > \
                chebyshev.expansion_order(tau, 1e-5)

    def test_monotone_in_tau(self):
        orders = [chebyshev.expansion_order(tau, 1e-6)
                  for tau in (1.0, 5.0, 20.0, 80.0, 320.0)]
        assert orders == sorted(orders)

    def test_asymptotic_overhead_is_modest(self):
        for tau in (50.0, 100.0, 300.0):
            ratio = chebyshev.expansion_order(tau, 1e-6) / tau
            assert 1.0 < ratio < 1.6

    def test_zero_tau(self):
        assert chebyshev.expansion_order(0.0, 1e-6) == 1

    def test_cut_is_minimal_and_certified(self):
        tau, eps = 37.0, 1e-8
        order = chebyshev.expansion_order(tau, eps)
        coef = 2.0 * np.abs(chebyshev.bessel_sequence(tau, order + 200))
        coef[0] *= 0.5
        assert coef[order:].max() < eps      # everything dropped is below eps
        assert coef[order - 1] >= eps        # one less would not be

    def test_rejects_bad_epsilon(self):
        for eps in (0.0, 1.0, -1e-6, 2.0):
            with pytest.raises(ValueError):
                chebyshev.expansion_order(1.0, eps)


class TestPlan:
    def test_coefficients_follow_phase_cycle(self):
        plan = chebyshev.build_plan(1.0, 1e-10)
        seq = chebyshev.bessel_sequence(1.0, plan.order)
        assert plan.coefficients[0] == pytest.approx(J0_AT_1, abs=1e-15)
        assert plan.coefficients[1] == pytest.approx(-2j * J1_AT_1, abs=1e-15)
        for k in range(1, plan.order + 1):
            expect = 2.0 * (-1j) ** k * seq[k]
            assert plan.coefficients[k] == pytest.approx(expect, abs=1e-15)

    def test_tail_below_epsilon(self):
        for tau in (3.0, 40.0, 200.0):
            for eps in (1e-5, 1e-6, 1e-12):
                plan = chebyshev.build_plan(tau, eps)
                assert plan.tail_abs < eps

    def test_coefficient_count(self):
        plan = chebyshev.build_plan(12.0, 1e-6)
        assert len(plan.coefficients) == plan.order + 1


class TestPropagate:
    def _random_setup(self, seed):
        rng = np.random.default_rng(seed)
        model = oracles.random_model(rng)
        bound = energy_bound_e1(model)
        psi = oracles.random_state(rng, model.dim)
        return rng, model, bound, psi

    def test_matches_dense_exponential(self):
        rng, model, bound, psi = self._random_setup(51)
        h = oracles.dense_hamiltonian(model)
        for t in (0.1, 0.9, 4.0):
            out, info = chebyshev.propagate(psi, model, bound, t,
                                            epsilon=1e-12)
            ref = oracles.dense_propagate(h, psi, t)
            assert np.linalg.norm(out - ref) < 1e-10
            assert info.g_applications == info.order - 1

    def test_norm_drift_tracks_epsilon(self):
        _, model, bound, psi = self._random_setup(52)
        out, _ = chebyshev.propagate(psi, model, bound, 2.0, epsilon=1e-12)
        assert abs(np.vdot(out, out).real - 1.0) < 1e-9

    def test_plan_reuse_is_bit_identical(self):
        _, model, bound, psi = self._random_setup(53)
        t = 1.3
        plan = chebyshev.build_plan(bound.tau(t), 1e-8)
        a, _ = chebyshev.propagate(psi, model, bound, t, epsilon=1e-8)
        b, _ = chebyshev.propagate(psi, model, bound, t, plan=plan)
        assert np.array_equal(a, b)

    def test_mismatched_plan_rejected(self):
        _, model, bound, psi = self._random_setup(54)
        plan = chebyshev.build_plan(bound.tau(1.0), 1e-8)
        with pytest.raises(ValueError):
            chebyshev.propagate(psi, model, bound, 2.0, plan=plan)

    def test_zero_time_is_identity(self):
        _, model, bound, psi = self._random_setup(55)
        out, info = chebyshev.propagate(psi, model, bound, 0.0)
        assert np.allclose(out, psi, atol=1e-15)
        assert info.order == 1
        assert info.g_applications == 0

    def test_negative_time_rejected(self):
        _, model, bound, psi = self._random_setup(56)
        with pytest.raises(ValueError):
            chebyshev.propagate(psi, model, bound, -0.5)

    def test_zero_model_returns_copy(self):
        from spinbath.model import SpinModel
        model = SpinModel(m=1, n=2, system_terms=(), bath_terms=(),
                          coupling_terms=(), metadata={})
        bound = energy_bound_e1(model)
        psi = oracles.random_state(np.random.default_rng(1), model.dim)
        out, info = chebyshev.propagate(psi, model, bound, 5.0)
        assert np.array_equal(out, psi)
        assert out is not psi
        assert info.g_applications == 0

    def test_composition_of_leaps(self):
        # two half leaps equal one full leap within coefficient accuracy
        _, model, bound, psi = self._random_setup(57)
        one, _ = chebyshev.propagate(psi, model, bound, 2.4, epsilon=1e-12)
        half, _ = chebyshev.propagate(psi, model, bound, 1.2, epsilon=1e-12)
        two, _ = chebyshev.propagate(half, model, bound, 1.2, epsilon=1e-12)
        assert np.linalg.norm(one - two) < 1e-10
