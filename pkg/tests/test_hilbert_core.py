"""
Tests for the finite-dimensional linear algebra layer.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from everett_lab.exceptions import CapacityError, ContractError
from everett_lab.hilbert_core import (
    OperatorMatrix,
    StateVector,
    Tolerances,
    check_capacity,
    evolve,
    inner,
    propagator,
    random_hermitian,
    random_state,
    random_unitary,
    reduced_density_matrix,
    spectral,
    tensor,
    tensor_all,
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestStateVector:
    def test_from_amplitudes_normalizes(self):
        psi = StateVector.from_amplitudes([3.0, 4.0j])
        assert psi.norm_squared == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(psi.amplitudes, [0.6, 0.8j])

    def test_unnormalized_amplitudes_rejected(self):
        with pytest.raises(ContractError):
            StateVector((2,), np.array([1.0, 1.0]))

    def test_zero_vector_rejected(self):
        with pytest.raises(ContractError):
            StateVector.from_amplitudes([0.0, 0.0])

    def test_amplitude_count_must_match_dims(self):
        with pytest.raises(ContractError):
            StateVector((2, 2), np.array([1.0, 0.0, 0.0]))

    def test_amplitudes_are_read_only(self):
        psi = StateVector.basis(0, (2,))
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0.0

    def test_equality_ignores_rounding_but_not_phase(self):
        psi = StateVector.from_amplitudes([1.0, 1.0])
        nudged = StateVector((2,), psi.amplitudes + 1e-14 * np.array([1.0, -1.0]))
        assert psi == nudged
        assert psi != StateVector((2,), -psi.amplitudes)

    def test_component_index_is_slowest(self):
        values = np.arange(1, 7, dtype=complex)
        psi = StateVector.from_amplitudes(values, dims=(3,), component_count=2)
        assert psi.as_tensor().shape == (2, 3)
        np.testing.assert_allclose(psi.component(1), values[3:] / np.linalg.norm(values))
        np.testing.assert_allclose(psi.density(), np.abs(psi.component(0)) ** 2 + np.abs(psi.component(1)) ** 2)


class TestOperators:
    def test_identity_is_hermitian_and_unitary(self):
        ident = OperatorMatrix.identity(4)
        assert ident.is_hermitian and ident.is_unitary

    def test_non_square_rejected(self):
        with pytest.raises(ContractError):
            OperatorMatrix(np.zeros((2, 3)))

    def test_apply_per_component(self, rng):
        psi = random_state((3,), rng, component_count=2)
        u = random_unitary(3, rng)
        out = u.apply(psi)
        np.testing.assert_allclose(out.component(0), u.entries @ psi.component(0))
        np.testing.assert_allclose(out.component(1), u.entries @ psi.component(1))

    def test_apply_dimension_mismatch(self, rng):
        with pytest.raises(ContractError):
            OperatorMatrix.identity(5).apply(random_state((3,), rng))

    def test_spectral_requires_hermitian(self):
        with pytest.raises(ContractError):
            spectral(OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])))

    def test_degenerate_blocks(self):
        decomposition = spectral(OperatorMatrix.diagonal([2.0, 1.0, 2.0, 3.0]))
        assert decomposition.degeneracy_blocks == ((0,), (1, 2), (3,))
        assert decomposition.block_values == pytest.approx((1.0, 2.0, 3.0))
        projector = decomposition.projector(1)
        np.testing.assert_allclose(projector, np.diag([1.0, 0.0, 1.0, 0.0]), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=1, max_value=8))
def test_spectral_reconstruction(seed, dim):
    rng = np.random.default_rng(seed)
    a = random_hermitian(dim, rng)
    decomposition = spectral(a)
    assert decomposition.reconstruction_error(a) <= 1e-10 * max(1.0, np.linalg.norm(a.entries, 2))
    assert decomposition.gram_error() <= 1e-10
    assert np.all(np.diff(decomposition.eigenvalues) >= 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=1, max_value=8), t=st.floats(min_value=-10.0, max_value=10.0))
def test_propagator_is_unitary(seed, dim, t):
    rng = np.random.default_rng(seed)
    u = propagator(random_hermitian(dim, rng), t)
    assert u.is_unitary


def test_evolve_preserves_norm_and_composes(rng):
    h = random_hermitian(5, rng)
    psi = random_state((5,), rng)
    once = evolve(psi, h, 0.7)
    twice = evolve(evolve(psi, h, 0.3), h, 0.4)
    assert once.norm_squared == pytest.approx(1.0, abs=1e-12)
    assert once.distance(twice) <= 1e-10


def test_evolve_rejects_non_hermitian(rng):
    with pytest.raises(ContractError):
        evolve(random_state((2,), rng), OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])), 1.0)


class TestTensorAndTrace:
    def test_tensor_concatenates_dims(self, rng):
        a, b = random_state((2,), rng), random_state((3,), rng)
        ab = tensor(a, b)
        assert ab.dims == (2, 3)
        np.testing.assert_allclose(ab.amplitudes, np.kron(a.amplitudes, b.amplitudes))

    def test_tensor_components_combine(self, rng):
        a = random_state((2,), rng, component_count=2)
        b = random_state((2,), rng, component_count=3)
        assert tensor(a, b).component_count == 6

    def test_capacity(self, rng):
        a = random_state((4,), rng)
        with pytest.raises(CapacityError) as excinfo:
            tensor_all([a, a, a], cap=32)
        assert excinfo.value.exit_code == 3
        check_capacity(64, cap=64)

    def test_inner_is_conjugate_linear_in_first_argument(self):
        a = StateVector.from_amplitudes([1.0j, 0.0])
        b = StateVector.from_amplitudes([1.0, 0.0])
        assert inner(a, b) == pytest.approx(-1.0j)

    def test_inner_shape_mismatch(self, rng):
        with pytest.raises(ContractError):
            inner(random_state((2,), rng), random_state((3,), rng))

    def test_product_state_reduces_to_pure_factor(self, rng):
        a, b = random_state((2,), rng), random_state((3,), rng)
        rho_a = reduced_density_matrix(tensor(a, b), keep=[0])
        np.testing.assert_allclose(rho_a, np.outer(a.amplitudes, a.amplitudes.conj()), atol=1e-12)

    def test_bell_state_reduces_to_maximally_mixed(self):
        bell = StateVector.from_amplitudes([1.0, 0.0, 0.0, 1.0], dims=(2, 2))
        np.testing.assert_allclose(reduced_density_matrix(bell, keep=[1]), np.eye(2) / 2, atol=1e-15)

    def test_keep_out_of_range(self, rng):
        with pytest.raises(ContractError):
            reduced_density_matrix(random_state((2, 2), rng), keep=[2])


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dims=st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=3))
def test_reduced_density_matrix_is_a_density_matrix(seed, dims):
    rng = np.random.default_rng(seed)
    psi = random_state(dims, rng)
    rho = reduced_density_matrix(psi, keep=[0])
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(rho)) >= -1e-12


class TestSpectralContract:
    def test_identity_is_one_block(self):
        decomposition = spectral(OperatorMatrix.identity(4))
        assert decomposition.degeneracy_blocks == ((0, 1, 2, 3),)
        assert decomposition.block_values == pytest.approx((1.0,))

    def test_two_fold_degeneracy(self):
        decomposition = spectral(OperatorMatrix.diagonal([2.0, 2.0, 5.0]))
        assert decomposition.degeneracy_blocks == ((0, 1), (2,))

    def test_non_orthonormal_eigenvectors_rejected(self, rng, monkeypatch):
        eigh = np.linalg.eigh

        def stretched(entries):
            values, vectors = eigh(entries)
            return values, vectors * (1.0 + 1e-6)

        a = random_hermitian(4, rng)
        monkeypatch.setattr(np.linalg, "eigh", stretched)
        with pytest.raises(ContractError, match="orthonormal"):
            spectral(a)

    def test_reconstruction_error_rejected(self, rng, monkeypatch):
        eigh = np.linalg.eigh

        def shifted(entries):
            values, vectors = eigh(entries)
            return values + 1e-6, vectors

        a = random_hermitian(4, rng)
        monkeypatch.setattr(np.linalg, "eigh", shifted)
        with pytest.raises(ContractError, match="reconstruction"):
            spectral(a)

    def test_reconstruction_tolerance_is_configurable(self, rng, monkeypatch):
        eigh = np.linalg.eigh

        def shifted(entries):
            values, vectors = eigh(entries)
            return values + 1e-6, vectors

        a = random_hermitian(4, rng)
        monkeypatch.setattr(np.linalg, "eigh", shifted)
        decomposition = spectral(a, tolerances=Tolerances(reconstruction=1e-4))
        assert decomposition.eigenvalues.size == 4


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=1, max_value=6))
def test_inner_product_axioms(seed, dim):
    rng = np.random.default_rng(seed)
    a, b, c = (random_state((dim,), rng) for _ in range(3))
    alpha, beta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    combined = alpha * b.amplitudes + beta * c.amplitudes
    scale = np.linalg.norm(combined)
    if scale < 1e-6:
        return
    mixed = StateVector.from_amplitudes(combined, (dim,))
    assert inner(a, mixed) * scale == pytest.approx(alpha * inner(a, b) + beta * inner(a, c), abs=1e-10)
    assert inner(a, b) == pytest.approx(inner(b, a).conjugate(), abs=1e-14)
    assert inner(a, a).real == pytest.approx(1.0, abs=1e-12)
    assert abs(inner(a, a).imag) <= 1e-15


def test_equal_states_give_equal_matrix_elements(rng):
    psi = random_state((5,), rng)
    twin = StateVector.from_amplitudes(psi.amplitudes + 1e-15 * rng.normal(size=5), (5,))
    assert psi == twin
    for b in range(5):
        basis = StateVector.basis(b, (5,))
        assert abs(inner(basis, psi) - inner(basis, twin)) <= 1e-12


class TestTensorLaws:
    def test_basis_product(self):
        product = tensor(StateVector.basis(0, (2,)), StateVector.basis(1, (2,)))
        np.testing.assert_allclose(product.amplitudes, [0.0, 1.0, 0.0, 0.0])

    def test_superposition_product(self):
        plus = StateVector.from_amplitudes([1.0, 1.0])
        product = tensor(plus, StateVector.basis(0, (2,)))
        np.testing.assert_allclose(product.amplitudes, np.array([1.0, 0.0, 1.0, 0.0]) / math.sqrt(2.0))

    def test_product_is_normalized(self, rng):
        product = tensor(random_state((3,), rng), random_state((5,), rng))
        assert product.norm_squared == pytest.approx(1.0, abs=1e-12)

    def test_associative(self, rng):
        a, b, c = random_state((2,), rng), random_state((3,), rng), random_state((2,), rng)
        left = tensor(tensor(a, b), c)
        right = tensor(a, tensor(b, c))
        assert left.dims == right.dims == (2, 3, 2)
        assert np.linalg.norm(left.amplitudes - right.amplitudes) == 0.0


class TestEvolveExamples:
    def test_zero_generator_is_identity(self, rng):
        psi = random_state((4,), rng)
        assert evolve(psi, OperatorMatrix(np.zeros((4, 4))), 3.7) == psi

    def test_full_period_returns_state(self, rng):
        psi = random_state((2,), rng)
        assert evolve(psi, OperatorMatrix.diagonal([0.0, 1.0]), 2.0 * math.pi).distance(psi) <= 1e-12

    def test_norm_preserved_over_long_times(self, rng):
        h = random_hermitian(8, rng)
        psi = random_state((8,), rng)
        drift = max(abs(evolve(psi, h, t).norm_squared - 1.0) for t in np.linspace(0.0, 100.0, 41))
        assert drift <= 1e-10
