"""
everett_lab/wavepacket_lab.py
Generated: 2026-10-17.1340
Purpose: Discretized 1-D continuum states for the density-interpretation checks

Grid: n interior points between hard walls at x_min and x_max, so
dx = (x_max - x_min) / (n + 1) and psi vanishes on the walls. The kinetic
operator is spectral in the sine basis (DST-I), so H is dense and exact for
band-limited packets. Propagation runs in the eigenbasis of H, which keeps it
unitary step by step for both schemes:
- "spectral": exp(-i E dt / hbar) per eigenmode
- "crank_nicolson": the Cayley factor (1 - i E dt / 2 hbar) / (1 + i E dt / 2 hbar)

Units default to hbar = m = 1. Packets must stay at least 5 sigma from the walls.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np
from scipy import linalg

from .exceptions import CapacityError, ContractError, PropagationError
from .output_manager import atomic_write_text

logger = logging.getLogger("everett_lab.wavepacket_lab")

NORM_TOL = 1e-10
TWO_PARTICLE_NORM_TOL = 1e-9
STEP_DRIFT_TOL = 1e-12
CUMULATIVE_DRIFT_TOL = 1e-8
MAX_TWO_PARTICLE_POINTS = 256
WALL_CLEARANCE_SIGMAS = 5.0
SCHEMES = ("spectral", "crank_nicolson")


@dataclass(frozen=True)
class Grid:
    """Interior grid between hard walls; carries the units"""
    x_min: float
    x_max: float
    n_points: int
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.n_points < 3:
            raise ContractError(f"grid needs at least 3 points, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ContractError(f"x_max must exceed x_min ({self.x_min}, {self.x_max})")
        if self.mass <= 0.0 or self.hbar <= 0.0:
            raise ContractError("mass and hbar must be positive")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / (self.n_points + 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(1, self.n_points + 1)

    def kinetic_matrix(self) -> np.ndarray:
        return _kinetic_matrix(self)

    def hamiltonian(self, potential: np.ndarray) -> np.ndarray:
        return self.kinetic_matrix() + np.diag(np.asarray(potential, dtype=float))

    def refined(self) -> "Grid":
        """Same box with dx halved"""
        return Grid(self.x_min, self.x_max, 2 * self.n_points + 1, self.mass, self.hbar)


@lru_cache(maxsize=8)
def _kinetic_matrix(grid: Grid) -> np.ndarray:
    n = grid.n_points
    j = np.arange(1, n + 1)
    sine_basis = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))
    kinetic = (grid.hbar * np.pi * j / grid.length) ** 2 / (2.0 * grid.mass)
    return (sine_basis * kinetic) @ sine_basis


@lru_cache(maxsize=16)
def _spectrum(grid: Grid, potential_bytes: bytes) -> Tuple[np.ndarray, np.ndarray]:
    potential = np.frombuffer(potential_bytes, dtype=float)
    energies, modes = linalg.eigh(grid.hamiltonian(potential))
    return energies, modes


def spectrum(grid: Grid, potential: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors of the grid Hamiltonian"""
    return _spectrum(grid, np.ascontiguousarray(potential, dtype=float).tobytes())


@dataclass(frozen=True, eq=False)
class GridState:
    grid: Grid
    amplitudes: np.ndarray
    potential: np.ndarray = field(default=None)

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amplitudes.size != self.grid.n_points:
            raise ContractError(f"expected {self.grid.n_points} amplitudes, got {amplitudes.size}")
        potential = np.zeros(self.grid.n_points) if self.potential is None else np.asarray(self.potential, dtype=float)
        if potential.shape != amplitudes.shape:
            raise ContractError("potential must be sampled on the same grid")
        norm = float(np.sum(np.abs(amplitudes) ** 2) * self.grid.dx)
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractError(f"grid state not normalized: sum |psi|^2 dx = {norm:.12f}")
        amplitudes.setflags(write=False)
        potential.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "potential", potential)

    @classmethod
    def from_samples(cls, grid: Grid, samples, potential=None) -> "GridState":
        samples = np.asarray(samples, dtype=complex).ravel()
        norm = math.sqrt(float(np.sum(np.abs(samples) ** 2)) * grid.dx)
        if norm == 0.0:
            raise ContractError("cannot normalize a vanishing wave function")
        return cls(grid, samples / norm, potential)

    # Mirrors of the grid fields
    @property
    def x_min(self) -> float:
        return self.grid.x_min

    @property
    def x_max(self) -> float:
        return self.grid.x_max

    @property
    def n_points(self) -> int:
        return self.grid.n_points

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def mass(self) -> float:
        return self.grid.mass

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.density) * self.dx)

    def with_potential(self, potential) -> "GridState":
        return GridState(self.grid, self.amplitudes, potential)

    def with_phase(self, alpha: float) -> "GridState":
        return GridState(self.grid, self.amplitudes * np.exp(1j * alpha), self.potential)

    def energy(self) -> float:
        h = self.grid.hamiltonian(self.potential)
        return float(np.real(np.vdot(self.amplitudes, h @ self.amplitudes)) * self.dx)


# =============================================================================
# BUILDERS
# =============================================================================

def harmonic_potential(grid: Grid, omega: float = 1.0, center: float = 0.0) -> np.ndarray:
    return 0.5 * grid.mass * omega ** 2 * (grid.x - center) ** 2


def linear_potential(grid: Grid, force: float) -> np.ndarray:
    """V = -F x, a constant force F"""
    return -force * grid.x


def gaussian_packet(grid: Grid, x0: float, sigma: float, k0: float = 0.0, potential=None) -> GridState:
    """psi ~ exp(-(x - x0)^2 / (4 sigma^2) + i k0 x); sigma is the position spread"""
    if sigma <= 0.0:
        raise ContractError(f"sigma must be positive, got {sigma}")
    clearance = WALL_CLEARANCE_SIGMAS * sigma
    if x0 - clearance < grid.x_min or x0 + clearance > grid.x_max:
        raise ContractError(f"packet at {x0} with sigma {sigma} is closer than {WALL_CLEARANCE_SIGMAS} sigma to a wall")
    x = grid.x
    samples = np.exp(-(x - x0) ** 2 / (4.0 * sigma ** 2) + 1j * k0 * x)
    return GridState.from_samples(grid, samples, potential)


def stationary_state(grid: Grid, potential, level: int = 0) -> GridState:
    """Eigenstate `level` of H, sign fixed so its first significant lobe is positive"""
    energies, modes = spectrum(grid, potential)
    if not 0 <= level < energies.size:
        raise ContractError(f"level {level} out of range")
    vector = modes[:, level]
    lead = vector[np.argmax(np.abs(vector) > 1e-3 * np.abs(vector).max())]
    if lead < 0:
        vector = -vector
    return GridState.from_samples(grid, vector, potential)


def stationary_energy(grid: Grid, potential, level: int = 0) -> float:
    energies, _ = spectrum(grid, potential)
    return float(energies[level])


# =============================================================================
# OBSERVABLES
# =============================================================================

def expectation_position(state: GridState) -> float:
    return float(np.sum(state.x * state.density) * state.dx)


def spectral_derivative(state: GridState) -> np.ndarray:
    """d psi / dx through the FFT; exact for packets decayed well before the walls"""
    k = 2.0 * np.pi * np.fft.fftfreq(state.n_points, d=state.dx)
    return np.fft.ifft(1j * k * np.fft.fft(state.amplitudes))


def expectation_momentum(state: GridState) -> float:
    derivative = spectral_derivative(state)
    return float(np.real(np.vdot(state.amplitudes, -1j * state.grid.hbar * derivative)) * state.dx)


def packet_width(state: GridState) -> float:
    mean = expectation_position(state)
    return math.sqrt(float(np.sum((state.x - mean) ** 2 * state.density) * state.dx))


def free_width(t: float, sigma0: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """Spreading law of a free Gaussian: sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2)"""
    return sigma0 * math.sqrt(1.0 + (hbar * t / (2.0 * mass * sigma0 ** 2)) ** 2)


# =============================================================================
# PROPAGATION
# =============================================================================

def _step_factors(energies: np.ndarray, dt: float, hbar: float, scheme: str) -> np.ndarray:
    if scheme == "spectral":
        return np.exp(-1j * energies * dt / hbar)
    if scheme == "crank_nicolson":
        half = 0.5j * energies * dt / hbar
        return (1.0 - half) / (1.0 + half)
    raise ContractError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def propagate(state: GridState, dt: float, steps: int, scheme: str = "spectral") -> GridState:
    """
    Evolve `steps` steps of size dt under the state's own potential.

    Each step multiplies the eigen-coefficients by unit-modulus factors; the
    loop is kept explicit so rounding accumulates as in real time stepping.
    Raises PropagationError when the cumulative norm drift exceeds 1e-8.
    """
    evolved, _ = propagate_with_diagnostics(state, dt, steps, scheme)
    return evolved


def propagate_with_diagnostics(state: GridState, dt: float, steps: int,
                               scheme: str = "spectral") -> Tuple[GridState, Dict[str, float]]:
    """propagate() plus the measured norm drift; the returned state is renormalized"""
    if dt <= 0.0 or steps < 1:
        raise ContractError(f"dt must be positive and steps >= 1 (dt={dt}, steps={steps})")
    energies, modes = spectrum(state.grid, state.potential)
    factors = _step_factors(energies, dt, state.grid.hbar, scheme)
    step_drift = float(np.max(np.abs(np.abs(factors) - 1.0)))
    if step_drift > STEP_DRIFT_TOL:
        raise PropagationError("step factors are not unitary", {'step_drift': step_drift, 'dt': dt})

    coefficients = modes.T @ state.amplitudes
    for _ in range(steps):
        coefficients = coefficients * factors
    amplitudes = modes @ coefficients

    initial_norm = state.norm
    final_norm = float(np.sum(np.abs(amplitudes) ** 2) * state.dx)
    drift = abs(final_norm - initial_norm)
    if drift > CUMULATIVE_DRIFT_TOL:
        diagnostics = {'steps': steps, 'dt': dt, 'scheme': scheme, 'initial_norm': initial_norm,
                       'final_norm': final_norm, 'drift': drift}
        logger.error(f"Norm drift {drift:.3e} after {steps} steps")
        raise PropagationError(f"cumulative norm drift {drift:.3e} exceeds {CUMULATIVE_DRIFT_TOL}", diagnostics)
    logger.debug(f"Propagated {steps} steps of dt={dt} ({scheme}), drift {drift:.2e}")
    evolved = GridState(state.grid, amplitudes / math.sqrt(final_norm / initial_norm), state.potential)
    return evolved, {'steps': steps, 'dt': dt, 'drift': drift, 'final_norm': final_norm}


def trajectory(state: GridState, dt: float, steps: int, samples: int,
               scheme: str = "spectral") -> Tuple[np.ndarray, List[GridState]]:
    """States at `samples` + 1 equally spaced times from 0 to steps * dt"""
    if steps % samples:
        raise ContractError(f"steps ({steps}) must be a multiple of samples ({samples})")
    chunk = steps // samples
    states = [state]
    for _ in range(samples):
        states.append(propagate(states[-1], dt, chunk, scheme))
    times = dt * chunk * np.arange(samples + 1)
    return times, states


# =============================================================================
# DENSITY-INTERPRETATION CHECKS
# =============================================================================

def probability_current(state: GridState) -> np.ndarray:
    """j = (hbar / m) Im(psi* d psi / dx) with central differences, walls at zero"""
    padded = np.concatenate(([0.0], state.amplitudes, [0.0]))
    derivative = (padded[2:] - padded[:-2]) / (2.0 * state.dx)
    return state.grid.hbar / state.mass * np.imag(np.conj(state.amplitudes) * derivative)


def continuity_residual(state_before: GridState, state_after: GridState, dt: float) -> float:
    """
    max |d rho/dt + dj/dx| over interior points, centred at t + dt/2.

    Both derivatives are second-order differences, so the residual is bounded
    by C (dx^2 + dt^2) with C set by the packet's third derivatives.
    """
    if state_before.grid != state_after.grid:
        raise ContractError("snapshots must share a grid")
    drho_dt = (state_after.density - state_before.density) / dt
    current = 0.5 * (probability_current(state_before) + probability_current(state_after))
    dj_dx = (current[2:] - current[:-2]) / (2.0 * state_before.dx)
    return float(np.max(np.abs(drho_dt[1:-1] + dj_dx)))


def perturbation_energy(state: GridState, u_pert) -> float:
    """First-order energy shift: the integral of rho U on the grid"""
    u_pert = np.asarray(u_pert, dtype=float)
    if u_pert.shape != state.density.shape:
        raise ContractError("perturbation must be sampled on the state's grid")
    return float(np.sum(state.density * u_pert) * state.dx)


def rediagonalized_energy_shift(state: GridState, u_pert, lam: float, level: int = 0) -> float:
    """(E(lam) - E(0)) / lam from exact diagonalization of H and H + lam U"""
    if lam == 0.0:
        raise ContractError("lam must be nonzero")
    h = state.grid.hamiltonian(state.potential)
    subset = [level, level]
    e0 = linalg.eigh(h, eigvals_only=True, subset_by_index=subset)[0]
    e_lam = linalg.eigh(h + lam * np.diag(np.asarray(u_pert, dtype=float)), eigvals_only=True,
                        subset_by_index=subset)[0]
    return float((e_lam - e0) / lam)


@dataclass(frozen=True)
class EhrenfestRecord:
    max_deviation: float
    times: np.ndarray
    positions: np.ndarray
    expected: np.ndarray


def ehrenfest_check(state: GridState, force_const: float, t_max: float, steps: int = 400,
                    samples: int = 40, scheme: str = "spectral") -> EhrenfestRecord:
    """
    Evolve under V = -F x (replacing the state's potential) and compare <x>(t)
    with x0 + v0 t + F t^2 / (2 m), v0 = <p>/m at t = 0.
    """
    moving = state.with_potential(linear_potential(state.grid, force_const))
    x0 = expectation_position(moving)
    v0 = expectation_momentum(moving) / moving.mass
    times, states = trajectory(moving, t_max / steps, steps, samples, scheme)
    positions = np.array([expectation_position(s) for s in states])
    expected = x0 + v0 * times + force_const * times ** 2 / (2.0 * moving.mass)
    deviation = float(np.max(np.abs(positions - expected)))
    return EhrenfestRecord(deviation, times, positions, expected)


def nodal_exclusion(state: GridState, threshold: float) -> float:
    """Density mass in cells where rho < threshold"""
    density = state.density
    return float(np.sum(density[density < threshold]) * state.dx)


def node_window_mass(state: GridState, node_x: float) -> float:
    """Density mass at grid points within dx of a node; O(dx^3) for a simple zero"""
    window = np.abs(state.x - node_x) <= state.dx * (1.0 + 1e-9)
    return float(np.sum(state.density[window]) * state.dx)


# =============================================================================
# TWO PARTICLES
# =============================================================================

@dataclass(frozen=True, eq=False)
class TwoParticleGridState:
    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        n = self.grid.n_points
        if n > MAX_TWO_PARTICLE_POINTS:
            raise CapacityError("two-particle grid too large", n * n, MAX_TWO_PARTICLE_POINTS ** 2)
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (n, n):
            raise ContractError(f"expected a {n}x{n} amplitude array, got {amplitudes.shape}")
        norm = float(np.sum(np.abs(amplitudes) ** 2) * self.grid.dx ** 2)
        if abs(norm - 1.0) > TWO_PARTICLE_NORM_TOL:
            raise ContractError(f"two-particle state not normalized: {norm:.12f}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def exchanged(self) -> "TwoParticleGridState":
        return TwoParticleGridState(self.grid, self.amplitudes.T)


def product_two_particle_state(state: GridState) -> TwoParticleGridState:
    return TwoParticleGridState(state.grid, np.outer(state.amplitudes, state.amplitudes))


def symmetrized_two_particle_state(first: GridState, second: GridState) -> TwoParticleGridState:
    if first.grid != second.grid:
        raise ContractError("both modes must share a grid")
    pair = np.outer(first.amplitudes, second.amplitudes)
    symmetric = pair + pair.T
    norm = math.sqrt(float(np.sum(np.abs(symmetric) ** 2)) * first.dx ** 2)
    if norm == 0.0:
        raise ContractError("symmetrized state vanishes")
    return TwoParticleGridState(first.grid, symmetric / norm)


def single_particle_marginal(state: TwoParticleGridState) -> np.ndarray:
    """rho(x) = 2 sum_{x2} |Psi(x, x2)|^2 dx; integrates to the particle number 2"""
    return 2.0 * np.sum(np.abs(state.amplitudes) ** 2, axis=1) * state.grid.dx


# =============================================================================
# SNAPSHOTS
# =============================================================================

def snapshot_csv_text(state: GridState) -> str:
    """Columns x, Re psi, Im psi, rho at 17 significant digits"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", "re_psi", "im_psi", "rho"])
    for row in zip(state.x, state.amplitudes.real, state.amplitudes.imag, state.density):
        writer.writerow([format(float(v), ".17g") for v in row])
    return buffer.getvalue()


def write_snapshot_csv(state: GridState, path) -> Dict[str, object]:
    return atomic_write_text(path, snapshot_csv_text(state))
