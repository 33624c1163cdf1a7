"""Bit-sliced operator application against dense Kronecker oracles."""

import numpy as np
import pytest

import oracles
from spinbath.errors import ConfigError
from spinbath.hilbert import (MAX_TOTAL_SPINS, HamiltonianTerm, WorkerPool,
                              apply_hamiltonian, apply_term, basis_dimension,
                              basis_state, field, inner_product, product_state,
                              random_bath_state, two_spin, vector_norm)


class TestTermConstruction:
    def test_field_has_single_site(self):
        t = field("z", 3, 0.25)
        assert t.kind == "field"
        assert t.site_b is None
        assert t.sites == (3,)

    def test_two_spin_site_pair(self):
        t = two_spin("x", 0, 4, -1.0)
        assert t.sites == (0, 4)

    def test_rejects_same_site_pair(self):
        with pytest.raises(ValueError):
            two_spin("z", 2, 2, 1.0)

    def test_rejects_bad_axis(self):
        with pytest.raises(ValueError):
            field("q", 0, 1.0)

    def test_rejects_negative_site(self):
        with pytest.raises(ValueError):
            field("x", -1, 1.0)

    def test_rejects_nonfinite_strength(self):
        with pytest.raises(ValueError):
            field("x", 0, float("nan"))

    def test_terms_are_immutable(self):
        t = field("z", 0, 1.0)
        with pytest.raises(Exception):
            t.strength = 2.0


class TestBasis:
    def test_dimension(self):
        assert basis_dimension(2, 3) == 32
        assert basis_dimension(1, 0) == 2

    def test_dimension_limit_named_in_error(self):
        with pytest.raises(ConfigError, match=str(MAX_TOTAL_SPINS)):
            basis_dimension(2, MAX_TOTAL_SPINS)

    def test_basis_state_one_hot(self):
        psi = basis_state(3, 5)
        assert psi.dtype == np.complex128
        assert psi[5] == 1.0
        assert np.count_nonzero(psi) == 1

    def test_basis_state_bounds(self):
        with pytest.raises(ValueError):
            basis_state(2, 4)


# frozen 2x2 actions on one spin: bit value 0 is up
def test_spin_z_signs():
    up, down = basis_state(1, 0), basis_state(1, 1)
    assert np.allclose(apply_term(up, field("z", 0, 1.0)), 0.5 * up)
    assert np.allclose(apply_term(down, field("z", 0, 1.0)), -0.5 * down)


def test_spin_x_flip():
    up, down = basis_state(1, 0), basis_state(1, 1)
    assert np.allclose(apply_term(up, field("x", 0, 1.0)), 0.5 * down)
    assert np.allclose(apply_term(down, field("x", 0, 1.0)), 0.5 * up)


def test_spin_y_phases():
    up, down = basis_state(1, 0), basis_state(1, 1)
    assert np.allclose(apply_term(up, field("y", 0, 1.0)), 0.5j * down)
    assert np.allclose(apply_term(down, field("y", 0, 1.0)), -0.5j * up)


def test_strength_scales_linearly():
    psi = oracles.random_state(np.random.default_rng(0), 8)
    one = apply_term(psi, two_spin("y", 0, 2, 1.0))
    wild = apply_term(psi, two_spin("y", 0, 2, -3.75))
    assert np.allclose(wild, -3.75 * one, atol=1e-15)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_two_spin_matches_dense(axis):
    rng = np.random.default_rng(7)
    psi = oracles.random_state(rng, 16)
    term = two_spin(axis, 1, 3, 0.8)
    dense = oracles.dense_term(4, term)
    assert np.allclose(apply_term(psi, term), dense @ psi, atol=1e-14)


def test_apply_term_sites_beyond_state_raise():
    psi = basis_state(2, 0)
    with pytest.raises(ValueError):
        apply_term(psi, field("z", 5, 1.0))


def test_apply_hamiltonian_is_term_sum():
    rng = np.random.default_rng(21)
    for _ in range(10):
        model = oracles.random_model(rng)
        psi = oracles.random_state(rng, model.dim)
        expected = sum(apply_term(psi, t) for t in model.all_terms)
        assert np.allclose(apply_hamiltonian(psi, model), expected, atol=1e-14)


def test_apply_hamiltonian_matches_dense():
    rng = np.random.default_rng(22)
    model = oracles.random_model(rng)
    psi = oracles.random_state(rng, model.dim)
    h = oracles.dense_hamiltonian(model)
    assert np.linalg.norm(apply_hamiltonian(psi, model) - h @ psi) < 1e-13


def test_pool_application_bitwise_identical():
    rng = np.random.default_rng(23)
    model = oracles.random_model(rng)
    psi = oracles.random_state(rng, model.dim)
    serial = apply_hamiltonian(psi, model)
    for workers in (2, 8):
        with WorkerPool(workers) as pool:
            threaded = apply_hamiltonian(psi, model, pool=pool)
        assert np.array_equal(serial, threaded)


def test_inner_product_matches_vdot():
    rng = np.random.default_rng(3)
    a = oracles.random_state(rng, 1 << 10)
    b = oracles.random_state(rng, 1 << 10)
    assert abs(inner_product(a, b) - np.vdot(a, b)) < 1e-14
    assert abs(vector_norm(a) - 1.0) < 1e-14


def test_random_bath_state_reproducible():
    a = random_bath_state(5, seed=99)
    b = random_bath_state(5, seed=99)
    c = random_bath_state(5, seed=100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (32,)
    assert abs(vector_norm(a) - 1.0) < 1e-12


def test_product_state_index_layout():
    # central index a and bath index e combine to a + e * 2^m
    central = basis_state(2, 2)
    bath = basis_state(3, 5)
    full = product_state(central, bath)
    assert full[2 + 5 * 4] == 1.0
    assert np.count_nonzero(full) == 1


def test_product_state_preserves_norm():
    rng = np.random.default_rng(17)
    central = oracles.random_state(rng, 4)
    bath = oracles.random_state(rng, 8)
    assert abs(vector_norm(product_state(central, bath)) - 1.0) < 1e-14
