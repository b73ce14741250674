"""
Tests for grid wavepackets: spectra, unitary propagation and the density checks.
"""

import math

import numpy as np
import pytest

from everett_lab import wavepacket_lab as wp
from everett_lab.exceptions import CapacityError, ContractError


@pytest.fixture
def grid():
    return wp.Grid(-20.0, 20.0, 256)


@pytest.fixture
def harmonic(grid):
    return wp.harmonic_potential(grid, omega=1.0)


class TestGrid:
    def test_spacing_excludes_walls(self, grid):
        assert grid.dx == pytest.approx(40.0 / 257)
        assert grid.x[0] == pytest.approx(-20.0 + grid.dx)
        assert grid.x[-1] == pytest.approx(20.0 - grid.dx)

    def test_refined_halves_dx(self, grid):
        assert grid.refined().dx == pytest.approx(grid.dx / 2)

    @pytest.mark.parametrize("args", [(-1.0, 1.0, 2), (1.0, -1.0, 10), (0.0, 1.0, 10, 0.0)])
    def test_invalid_grids(self, args):
        with pytest.raises(ContractError):
            wp.Grid(*args)

    def test_box_spectrum_is_exact(self, grid):
        energy = wp.stationary_energy(grid, np.zeros(grid.n_points), 0)
        assert energy == pytest.approx((math.pi / 40.0) ** 2 / 2, rel=1e-10)

    def test_unnormalized_state_rejected(self, grid):
        with pytest.raises(ContractError):
            wp.GridState(grid, np.ones(grid.n_points))


class TestStationaryStates:
    def test_harmonic_levels(self, grid, harmonic):
        for level in range(4):
            assert wp.stationary_energy(grid, harmonic, level) == pytest.approx(level + 0.5, abs=1e-9)

    def test_ground_state_moments(self, grid, harmonic):
        ground = wp.stationary_state(grid, harmonic, 0)
        assert ground.norm == pytest.approx(1.0, abs=1e-12)
        assert ground.energy() == pytest.approx(0.5, abs=1e-9)
        assert abs(wp.expectation_position(ground)) < 1e-10
        assert wp.packet_width(ground) == pytest.approx(math.sqrt(0.5), rel=1e-8)

    def test_level_out_of_range(self, grid, harmonic):
        with pytest.raises(ContractError):
            wp.stationary_state(grid, harmonic, grid.n_points)


class TestPropagation:
    @pytest.mark.parametrize("scheme", wp.SCHEMES)
    def test_stationary_density_is_constant(self, grid, harmonic, scheme):
        ground = wp.stationary_state(grid, harmonic, 0)
        later = wp.propagate(ground, 0.01, 500, scheme)
        np.testing.assert_allclose(later.density, ground.density, atol=1e-10)

    def test_norm_drift_over_many_steps(self, grid, harmonic):
        packet = wp.gaussian_packet(grid, 0.0, 1.0, k0=1.0, potential=harmonic)
        _, diagnostics = wp.propagate_with_diagnostics(packet, 0.01, 10000)
        assert diagnostics['drift'] <= 1e-8
        assert diagnostics['steps'] == 10000

    def test_free_spreading(self, grid):
        packet = wp.gaussian_packet(grid, 0.0, 1.0)
        later = wp.propagate(packet, 0.01, 200)
        assert wp.packet_width(later) == pytest.approx(wp.free_width(2.0, 1.0), rel=1e-4)

    def test_global_phase_does_not_change_density(self, grid, harmonic):
        packet = wp.gaussian_packet(grid, 1.0, 1.0, k0=0.5, potential=harmonic)
        a = wp.propagate(packet, 0.02, 50)
        b = wp.propagate(packet.with_phase(1.3), 0.02, 50)
        np.testing.assert_allclose(a.density, b.density, atol=1e-12)

    def test_unknown_scheme(self, grid):
        with pytest.raises(ContractError):
            wp.propagate(wp.gaussian_packet(grid, 0.0, 1.0), 0.01, 1, scheme="leapfrog")

    def test_invalid_step(self, grid):
        with pytest.raises(ContractError):
            wp.propagate(wp.gaussian_packet(grid, 0.0, 1.0), 0.0, 1)

    def test_trajectory_sampling(self, grid):
        times, states = wp.trajectory(wp.gaussian_packet(grid, 0.0, 1.0), 0.01, 100, 10)
        assert len(states) == 11
        assert times[-1] == pytest.approx(1.0)
        with pytest.raises(ContractError):
            wp.trajectory(states[0], 0.01, 101, 10)

    def test_packet_too_close_to_wall(self, grid):
        with pytest.raises(ContractError):
            wp.gaussian_packet(grid, 17.0, 1.0)


class TestDensityChecks:
    def test_momentum_expectation(self, grid):
        packet = wp.gaussian_packet(grid, 0.0, 1.0, k0=1.0)
        assert wp.expectation_momentum(packet) == pytest.approx(1.0, abs=1e-8)

    def test_continuity_residual_is_second_order(self, grid):
        residuals = []
        for g, dt in ((grid, 0.01), (grid.refined(), 0.005)):
            before = wp.gaussian_packet(g, 0.0, 1.0, k0=1.0)
            residuals.append(wp.continuity_residual(before, wp.propagate(before, dt, 1), dt))
        assert 3.0 <= residuals[0] / residuals[1] <= 5.0

    def test_continuity_needs_shared_grid(self, grid):
        a = wp.gaussian_packet(grid, 0.0, 1.0)
        b = wp.gaussian_packet(grid.refined(), 0.0, 1.0)
        with pytest.raises(ContractError):
            wp.continuity_residual(a, b, 0.01)

    def test_first_order_perturbation(self, grid, harmonic):
        ground = wp.stationary_state(grid, harmonic, 0)
        assert abs(wp.perturbation_energy(ground, grid.x)) < 1e-10
        assert wp.perturbation_energy(ground, grid.x ** 2) == pytest.approx(0.5, rel=1e-6)
        assert wp.rediagonalized_energy_shift(ground, grid.x ** 2, 1e-4) == pytest.approx(0.5, abs=1e-4)

    def test_rediagonalization_needs_nonzero_lambda(self, grid, harmonic):
        with pytest.raises(ContractError):
            wp.rediagonalized_energy_shift(wp.stationary_state(grid, harmonic, 0), grid.x ** 2, 0.0)

    def test_ehrenfest_linear_potential(self, grid):
        record = wp.ehrenfest_check(wp.gaussian_packet(grid, -2.0, 1.0, k0=1.0), 0.5, 2.0)
        assert record.max_deviation <= 1e-5
        assert record.positions[-1] == pytest.approx(-2.0 + 2.0 + 0.25 * 4.0, abs=1e-5)

    def test_node_mass_scales_as_dx_cubed(self):
        masses = []
        for n in (128, 256):
            g = wp.Grid(-20.0, 20.0, n)
            excited = wp.stationary_state(g, wp.harmonic_potential(g), 1)
            masses.append(wp.node_window_mass(excited, 0.0))
        assert 6.0 <= masses[0] / masses[1] <= 10.0

    def test_nodal_exclusion(self, grid, harmonic):
        ground = wp.stationary_state(grid, harmonic, 0)
        assert wp.nodal_exclusion(ground, 0.0) == 0.0
        assert 0.0 < wp.nodal_exclusion(ground, 1e-3) < 1e-2


class TestTwoParticles:
    def test_symmetrized_marginal_counts_two_particles(self):
        g = wp.Grid(-20.0, 20.0, 96)
        v = wp.harmonic_potential(g)
        pair = wp.symmetrized_two_particle_state(wp.stationary_state(g, v, 0), wp.stationary_state(g, v, 1))
        marginal = wp.single_particle_marginal(pair)
        assert marginal.sum() * g.dx == pytest.approx(2.0, abs=1e-8)
        np.testing.assert_allclose(pair.exchanged().amplitudes, pair.amplitudes, atol=1e-14)

    def test_product_state_is_normalized(self):
        g = wp.Grid(-20.0, 20.0, 64)
        pair = wp.product_two_particle_state(wp.gaussian_packet(g, 0.0, 1.5))
        assert np.sum(np.abs(pair.amplitudes) ** 2) * g.dx ** 2 == pytest.approx(1.0, abs=1e-9)

    def test_grid_cap(self):
        g = wp.Grid(-20.0, 20.0, 300)
        with pytest.raises(CapacityError):
            wp.product_two_particle_state(wp.gaussian_packet(g, 0.0, 1.0))


def test_snapshot_csv(tmp_path, grid):
    packet = wp.gaussian_packet(grid, 0.0, 1.0, k0=1.0)
    entry = wp.write_snapshot_csv(packet, tmp_path / "snapshot.csv")
    lines = (tmp_path / "snapshot.csv").read_text().splitlines()
    assert lines[0] == "x,re_psi,im_psi,rho"
    assert len(lines) == grid.n_points + 1
    assert entry['size_bytes'] == len((tmp_path / "snapshot.csv").read_bytes())
