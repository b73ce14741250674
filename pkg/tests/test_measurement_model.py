"""
Tests for the measurement chain, the dephasing bath, branch extraction and envariance.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from everett_lab import measurement_model as mm
from everett_lab.exceptions import CapacityError, ContractError
from everett_lab.hilbert_core import random_state, random_unitary

SQRT_03, SQRT_07 = math.sqrt(0.3), math.sqrt(0.7)


class TestPositionDetector:
    def test_setup_invariants(self):
        setup = mm.build_position_detector(3)
        verified = setup.verify()
        assert verified['a_hermitian_ok'] and verified['transport_ok']
        assert setup.register_dim == 4
        assert setup.b_values == (1.0, 2.0, 3.0)
        assert setup.recorder_map[-1].label == mm.OUTSIDE_LABEL
        assert setup.recorder_map[-1].y_value == 0.0

    def test_degenerate_recorders(self, rng):
        setup = mm.build_position_detector(2, states_per_recorder=2, transport=random_unitary(5, rng))
        assert setup.measured_dim == 4
        assert setup.verify()['transport_ok']
        assert [setup.recorder_of(i) for i in range(4)] == [0, 0, 1, 1]

    def test_transport_maps_eigenstates_to_recorders(self):
        setup = mm.build_position_detector(2)
        psi = mm.prepare_system_state(setup, [SQRT_03, SQRT_07])
        weights = mm.recorder_weights(setup, mm.transport_state(setup, psi))
        assert weights == pytest.approx((0.3, 0.7), abs=1e-12)

    def test_spectrum_of_a_matches_recorder_operator(self):
        verified = mm.build_position_detector(3).verify()
        assert verified['spectrum_ok']
        assert verified['spectrum_transport'] <= mm.SPECTRUM_TOL

    def test_spectrum_with_degenerate_random_transport(self, rng):
        setup = mm.build_position_detector(2, states_per_recorder=2, transport=random_unitary(5, rng))
        verified = setup.verify()
        assert verified['spectrum_ok']
        assert verified['spectrum_transport'] <= mm.SPECTRUM_TOL

    def test_outside_weight_rejected(self):
        setup = mm.build_position_detector(2)
        outside = setup.transport.adjoint().entries[:, -1]
        with pytest.raises(ContractError):
            mm.transport_state(setup, mm.StateVector.from_amplitudes(outside, (3,)))

    def test_duplicate_b_values_rejected(self):
        with pytest.raises(ContractError):
            mm.build_position_detector(2, b_values=[1.0, 1.0])

    def test_non_unitary_transport_rejected(self):
        with pytest.raises(ContractError):
            mm.build_position_detector(1, transport=mm.OperatorMatrix(np.eye(2) * 2.0))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            mm.build_position_detector(100, cap=1000)


class TestMeasurementChain:
    def test_measure_then_observe_records_agree(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07])
        state = mm.observe(mm.measure(state, setup))
        joint = np.real(np.diag(state.reduced(["detector", "observer"]))).reshape(3, 3)
        np.testing.assert_allclose(joint, np.diag([0.0, 0.3, 0.7]), atol=1e-12)

    def test_observation_leaves_detector_untouched(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07])
        measured = mm.measure(state, setup)
        observed = mm.observe(measured)
        np.testing.assert_allclose(np.diag(observed.reduced(["detector"])).real,
                                   np.diag(measured.reduced(["detector"])).real, atol=1e-14)

    def test_measure_requires_ready_detector(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False)
        measured = mm.measure(state, setup)
        with pytest.raises(ContractError):
            mm.measure(measured, setup)

    def test_observe_requires_record(self):
        _, state = mm.measurement_chain([SQRT_03, SQRT_07])
        with pytest.raises(ContractError):
            mm.observe(state)

    def test_coefficient_count_must_match(self):
        setup = mm.build_position_detector(3)
        with pytest.raises(ContractError):
            mm.measurement_chain([1.0, 0.0], setup=setup)

    def test_unknown_factor_name(self):
        _, state = mm.measurement_chain([1.0])
        with pytest.raises(ContractError):
            state.position("bath")

    def test_born_weights(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07])
        ensemble = mm.extract_branches(mm.measure(state, setup))
        assert ensemble.weight_of((1.0,)) == pytest.approx(0.3, abs=1e-12)
        assert ensemble.weight_of((2.0,)) == pytest.approx(0.7, abs=1e-12)
        assert ensemble.weight_sum == pytest.approx(1.0, abs=1e-12)

    def test_zero_amplitude_gives_no_branch(self):
        setup, state = mm.measurement_chain([1.0, 0.0, 0.0])
        ensemble = mm.extract_branches(mm.measure(state, setup))
        assert [b.labels for b in ensemble.branches] == [(1.0,)]
        assert ensemble.max_interference == 0.0

    def test_branch_states_sum_back(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False)
        measured = mm.measure(state, setup)
        ensemble = mm.extract_branches(measured)
        total = sum(math.sqrt(b.weight) * b.branch_state.state.amplitudes for b in ensemble.branches)
        np.testing.assert_allclose(total, measured.state.amplitudes, atol=1e-12)

    def test_measurement_is_linear(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False)
        measured = mm.measure(state, setup).state.amplitudes
        pieces = []
        for coefficients in ([1.0, 0.0], [0.0, 1.0]):
            _, basis_state = mm.measurement_chain(coefficients, setup=setup, with_observer=False)
            pieces.append(mm.measure(basis_state, setup).state.amplitudes)
        np.testing.assert_allclose(measured, SQRT_03 * pieces[0] + SQRT_07 * pieces[1], atol=1e-12)

    def test_extract_before_measure_rejected(self):
        _, state = mm.measurement_chain([SQRT_03, SQRT_07])
        with pytest.raises(ContractError):
            mm.extract_branches(state)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1), dim=st.integers(min_value=2, max_value=6))
def test_born_weights_for_random_states(seed, dim):
    rng = np.random.default_rng(seed)
    psi = random_state((dim,), rng)
    setup, state = mm.measurement_chain(psi.amplitudes, with_observer=False)
    ensemble = mm.extract_branches(mm.measure(state, setup), keep_states=False)
    for b, amplitude in zip(setup.b_values, psi.amplitudes):
        assert ensemble.weight_of((b,)) == pytest.approx(abs(amplitude) ** 2, abs=1e-10)


class TestDecoherence:
    def test_envelope_closed_form(self):
        assert mm.dephasing_envelope(1.0, 4, 0.5, 1.0) == pytest.approx(math.cos(0.5) ** 4)
        assert mm.dephasing_envelope(2.0, 3, 0.25, 1.0) == pytest.approx(math.cos(0.5) ** 3)

    def test_threshold_qubit_count(self):
        # |cos(0.5)|^n drops below 1e-3 from n = 53 on
        assert mm.dephasing_envelope(1.0, 52, 0.5, 1.0) > 1e-3
        assert mm.dephasing_envelope(1.0, 53, 0.5, 1.0) < 1e-3

    @pytest.mark.parametrize("env_qubits", [1, 3, 6])
    def test_interference_matches_envelope(self, env_qubits):
        coefficients = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
        setup, state = mm.measurement_chain(coefficients, with_observer=False, env_qubits=env_qubits)
        state = mm.decohere(mm.measure(state, setup), env_qubits, coupling=0.5, t=1.0)
        ensemble = mm.extract_branches(state)
        for i, a in enumerate(ensemble.branches):
            for j, b in enumerate(ensemble.branches):
                if i == j:
                    continue
                gap = abs(a.record_indices[0] - b.record_indices[0])
                expected = mm.dephasing_envelope(gap, env_qubits, 0.5, 1.0)
                assert ensemble.interference[i, j] == pytest.approx(expected, abs=1e-8)

    def test_decoherence_keeps_weights(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False, env_qubits=4)
        state = mm.decohere(mm.measure(state, setup), 4, coupling=0.5, t=1.0)
        ensemble = mm.extract_branches(state, keep_states=False)
        np.testing.assert_allclose(ensemble.weights, [0.3, 0.7], atol=1e-12)

    def test_strong_coupling_decoheres(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False, env_qubits=12)
        state = mm.decohere(mm.measure(state, setup), 12, coupling=0.5, t=3.0)
        ensemble = mm.extract_branches(state, keep_states=False)
        assert ensemble.decohered
        assert ensemble.max_interference == pytest.approx(abs(math.cos(1.5)) ** 12, abs=1e-10)

    def test_without_environment_interference_is_one(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False)
        ensemble = mm.extract_branches(mm.measure(state, setup))
        assert ensemble.max_interference == 1.0
        assert not ensemble.decohered

    def test_zero_coupling_is_identity(self):
        setup, state = mm.measurement_chain([SQRT_03, SQRT_07], with_observer=False, env_qubits=2)
        measured = mm.measure(state, setup)
        assert mm.decohere(measured, 2, coupling=0.0, t=1.0).state == measured.state


class TestRepeatedMeasurement:
    def test_product_weights(self):
        setup, state = mm.repeated_measurement([SQRT_03, SQRT_07], 3)
        ensemble = mm.extract_branches(state, keep_states=False)
        assert len(ensemble.branches) == 8
        probabilities = {1.0: 0.3, 2.0: 0.7}
        for branch in ensemble.branches:
            expected = math.prod(probabilities[b] for b in branch.labels)
            assert branch.weight == pytest.approx(expected, abs=1e-12)

    def test_eight_measurements_give_product_weights(self):
        _, state = mm.repeated_measurement([SQRT_03, SQRT_07], 8)
        ensemble = mm.extract_branches(state, keep_states=False)
        assert len(ensemble.branches) == 256
        probabilities = {1.0: 0.3, 2.0: 0.7}
        for branch in ensemble.branches:
            expected = math.prod(probabilities[b] for b in branch.labels)
            assert branch.weight == pytest.approx(expected, abs=1e-12)
        assert ensemble.weight_sum == pytest.approx(1.0, abs=1e-12)

    def test_register_names(self):
        _, state = mm.repeated_measurement([1.0, 0.0], 2)
        assert state.names == ("system[1]", "detector[1]", "system[2]", "detector[2]")

    def test_capacity(self):
        with pytest.raises(CapacityError):
            mm.repeated_measurement([SQRT_03, SQRT_07], 8, cap=10 ** 4)

    def test_needs_at_least_one_measurement(self):
        with pytest.raises(ContractError):
            mm.repeated_measurement([1.0], 0)


class TestEnvariance:
    def test_equal_magnitudes_are_envariant(self):
        setup = mm.build_envariance_setup(1 / math.sqrt(2), 1j / math.sqrt(2))
        assert mm.envariance_check(setup) <= 1e-12

    def test_unequal_magnitudes_are_not(self):
        setup = mm.build_envariance_setup(SQRT_03, SQRT_07)
        assert mm.envariance_check(setup) == pytest.approx(math.sqrt(2.0) * (SQRT_07 - SQRT_03), abs=1e-12)

    def test_random_environment_basis(self, rng):
        basis = random_unitary(4, rng).entries[:, :2]
        setup = mm.build_envariance_setup(np.exp(0.4j) / math.sqrt(2), np.exp(2.1j) / math.sqrt(2), env_basis=basis)
        assert setup.env_dim == 4
        assert mm.envariance_check(setup) <= 1e-10

    def test_non_orthonormal_basis_rejected(self):
        with pytest.raises(ContractError):
            mm.build_envariance_setup(1.0, 1.0, env_basis=np.array([[1.0, 1.0], [0.0, 0.0]]))
