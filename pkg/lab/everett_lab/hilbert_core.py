"""
everett_lab/hilbert_core.py
Generated: 2026-10-17.0925
Purpose: Finite-dimensional complex linear algebra with exact normalization and unitarity contracts

Provides:
- StateVector: normalized amplitudes over labeled factor dims plus a discrete component index j
- OperatorMatrix: dense complex operator with cached hermitian / unitary checks
- SpectralDecomposition: ascending eigenvalues, orthonormal eigenvectors, degeneracy blocks
- tensor, inner, evolve, spectral and the partial trace used by the measurement chain

Index order: the component index j is slowest, then factors in declared order.
All values are immutable after construction; every operation returns a new value.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from .exceptions import CapacityError, ContractError

logger = logging.getLogger("everett_lab.hilbert_core")

DEFAULT_DIMENSION_CAP = 2 ** 22


@dataclass(frozen=True)
class Tolerances:
    """Global numeric tolerances; configurable per run"""
    equality: float = 1e-12
    unitarity: float = 1e-10
    reconstruction: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=complex, copy=True)
    values.setflags(write=False)
    return values


def check_capacity(total: int, cap: int = DEFAULT_DIMENSION_CAP, what: str = "state dimension") -> None:
    if total > cap:
        raise CapacityError(f"{what} exceeds the dimension cap", requested=total, cap=cap)


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Normalized amplitude array over a finite basis.

    `amplitudes` has length component_count * prod(dims). Two states at zero
    norm distance (within the equality tolerance) compare equal.
    """
    dims: Tuple[int, ...]
    amplitudes: np.ndarray
    component_count: int = 1
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d <= 0 for d in dims):
            raise ContractError(f"factor dims must be positive integers, got {self.dims}")
        if self.component_count <= 0:
            raise ContractError(f"component_count must be positive, got {self.component_count}")
        amplitudes = _frozen(np.ravel(self.amplitudes))
        expected = self.component_count * int(np.prod(dims))
        if amplitudes.size != expected:
            raise ContractError(f"expected {expected} amplitudes for dims {dims}, got {amplitudes.size}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amplitudes)
        drift = abs(self.norm_squared - 1.0)
        if drift > self.tolerances.equality:
            raise ContractError(f"state is not normalized (|norm^2 - 1| = {drift:.3e})")

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Iterable[complex],
        dims: Optional[Sequence[int]] = None,
        component_count: int = 1,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "StateVector":
        """Build a state from unnormalized amplitudes, normalizing them"""
        values = np.asarray(list(amplitudes) if not isinstance(amplitudes, np.ndarray) else amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(values)
        if norm == 0.0:
            raise ContractError("cannot normalize the zero vector")
        if dims is None:
            dims = (values.size // component_count,)
        return cls(tuple(dims), values / norm, component_count, tolerances)

    @classmethod
    def basis(cls, index: int, dims: Sequence[int], component_count: int = 1) -> "StateVector":
        total = component_count * int(np.prod(dims))
        values = np.zeros(total, dtype=complex)
        values[index] = 1.0
        return cls(tuple(dims), values, component_count)

    @property
    def factor_dim(self) -> int:
        """Dimension of one component (product of factor dims)"""
        return int(np.prod(self.dims))

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @cached_property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def as_tensor(self) -> np.ndarray:
        """Amplitudes reshaped to (component_count, *dims)"""
        return self.amplitudes.reshape((self.component_count,) + self.dims)

    def component(self, j: int) -> np.ndarray:
        return self.amplitudes.reshape(self.component_count, self.factor_dim)[j]

    def component_densities(self) -> np.ndarray:
        """rho_j over the factor basis, shape (component_count, prod(dims))"""
        return np.abs(self.amplitudes.reshape(self.component_count, self.factor_dim)) ** 2

    def density(self) -> np.ndarray:
        """Total density: sum over the discrete index j of |psi_j|^2"""
        return self.component_densities().sum(axis=0)

    def distance(self, other: "StateVector") -> float:
        _require_same_shape(self, other)
        return float(np.linalg.norm(self.amplitudes - other.amplitudes))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        if self.dims != other.dims or self.component_count != other.component_count:
            return False
        return self.distance(other) <= self.tolerances.equality

    __hash__ = None


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense dim x dim complex operator; hermitian/unitary flags are computed once"""
    entries: np.ndarray
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ContractError(f"operator must be square, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, dim: int) -> "OperatorMatrix":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def diagonal(cls, values: Sequence[complex]) -> "OperatorMatrix":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def is_hermitian(self) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= self.tolerances.equality)

    @cached_property
    def is_unitary(self) -> bool:
        product = self.entries @ self.entries.conj().T
        return bool(np.max(np.abs(product - np.eye(self.dim)), initial=0.0) <= self.tolerances.unitarity)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.tolerances)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.dim != self.dim:
            raise ContractError(f"operator dims differ: {self.dim} vs {other.dim}")
        return OperatorMatrix(self.entries @ other.entries, self.tolerances)

    def apply(self, state: StateVector) -> StateVector:
        """Apply to every component (dim == prod(dims)) or to the whole vector (dim == total)"""
        if self.dim == state.factor_dim:
            block = state.amplitudes.reshape(state.component_count, state.factor_dim)
            values = block @ self.entries.T
        elif self.dim == state.dimension:
            values = self.entries @ state.amplitudes
        else:
            raise ContractError(
                f"operator dim {self.dim} matches neither component dim {state.factor_dim} "
                f"nor total dim {state.dimension}"
            )
        return StateVector(state.dims, values.ravel(), state.component_count, state.tolerances)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition of a hermitian operator with grouped degenerate eigenvalues"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_blocks: Tuple[Tuple[int, ...], ...]

    @property
    def block_values(self) -> Tuple[float, ...]:
        return tuple(float(np.mean(self.eigenvalues[list(block)])) for block in self.degeneracy_blocks)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def reconstruction_error(self, operator: OperatorMatrix) -> float:
        return float(np.linalg.norm(operator.entries - self.reconstruct()))

    def gram_error(self) -> float:
        gram = self.eigenvectors.conj().T @ self.eigenvectors
        return float(np.max(np.abs(gram - np.eye(gram.shape[0])), initial=0.0))

    def projector(self, block_index: int) -> np.ndarray:
        columns = self.eigenvectors[:, list(self.degeneracy_blocks[block_index])]
        return columns @ columns.conj().T


def _require_same_shape(a: StateVector, b: StateVector) -> None:
    if a.dims != b.dims or a.component_count != b.component_count:
        raise ContractError(
            f"shape mismatch: dims {a.dims}x{a.component_count} vs {b.dims}x{b.component_count}"
        )


def tensor(a: StateVector, b: StateVector, cap: int = DEFAULT_DIMENSION_CAP) -> StateVector:
    """
    Product state a (x) b.

    Factor dims are concatenated and the component indices combine as (j_a, j_b)
    with j_a slowest, so the convention stays "components first, then factors".
    """
    check_capacity(a.dimension * b.dimension, cap)
    left = a.amplitudes.reshape(a.component_count, a.factor_dim)
    right = b.amplitudes.reshape(b.component_count, b.factor_dim)
    values = np.einsum("ix,jy->ijxy", left, right)
    return StateVector(
        a.dims + b.dims,
        values.reshape(-1),
        a.component_count * b.component_count,
        a.tolerances,
    )


def tensor_all(states: Sequence[StateVector], cap: int = DEFAULT_DIMENSION_CAP) -> StateVector:
    return reduce(lambda left, right: tensor(left, right, cap), states)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument"""
    _require_same_shape(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def spectral(a: OperatorMatrix, degeneracy_tol: float = 1e-9,
             tolerances: Optional[Tolerances] = None) -> SpectralDecomposition:
    """
    Eigen-decomposition with ascending eigenvalues and grouped degenerate blocks.

    The eigenvector Gram matrix must be the identity and sum_k lambda_k P_k must
    rebuild `a` (relative to max(1, ||a||_F)) within the reconstruction tolerance.
    """
    tolerances = tolerances or a.tolerances
    if not a.is_hermitian:
        raise ContractError("spectral decomposition requires a hermitian operator")
    eigenvalues, eigenvectors = np.linalg.eigh(a.entries)
    blocks = []
    current = [0]
    for index in range(1, eigenvalues.size):
        if eigenvalues[index] - eigenvalues[index - 1] < degeneracy_tol:
            current.append(index)
        else:
            blocks.append(tuple(current))
            current = [index]
    blocks.append(tuple(current))
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    decomposition = SpectralDecomposition(eigenvalues, eigenvectors, tuple(blocks))

    gram_error = decomposition.gram_error()
    if gram_error > tolerances.reconstruction:
        raise ContractError(f"eigenvectors are not orthonormal (Gram error {gram_error:.3e})")
    scale = max(1.0, float(np.linalg.norm(a.entries)))
    reconstruction_error = decomposition.reconstruction_error(a) / scale
    if reconstruction_error > tolerances.reconstruction:
        raise ContractError(f"spectral reconstruction error {reconstruction_error:.3e} "
                            f"exceeds {tolerances.reconstruction:.1e}")
    return decomposition


def propagator(h: OperatorMatrix, t: float, hbar: float = 1.0) -> OperatorMatrix:
    """exp(-i h t / hbar) built from the spectral decomposition of h"""
    if not h.is_hermitian:
        raise ContractError("time evolution requires a hermitian generator")
    decomposition = spectral(h, tolerances=h.tolerances)
    v = decomposition.eigenvectors
    phases = np.exp(-1j * decomposition.eigenvalues * t / hbar)
    return OperatorMatrix((v * phases) @ v.conj().T, h.tolerances)


def evolve(state: StateVector, h: OperatorMatrix, t: float, hbar: float = 1.0) -> StateVector:
    """Unitary time development exp(-i h t / hbar) state"""
    return propagator(h, t, hbar).apply(state)


def reduced_density_matrix(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """
    Partial trace over every factor not in `keep` (factor positions, in order).

    The component index j is traced out together with the discarded factors.
    """
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(state.dims) for k in keep):
        raise ContractError(f"factor positions {keep} out of range for dims {state.dims}")
    psi = state.as_tensor()
    traced = [0] + [k + 1 for k in range(len(state.dims)) if k not in keep]
    rho = np.tensordot(psi, psi.conj(), axes=(traced, traced))
    kept_dim = int(np.prod([state.dims[k] for k in keep])) if keep else 1
    return rho.reshape(kept_dim, kept_dim)


def random_state(
    dims: Sequence[int],
    rng: np.random.Generator,
    component_count: int = 1,
) -> StateVector:
    total = component_count * int(np.prod(dims))
    values = rng.normal(size=total) + 1j * rng.normal(size=total)
    return StateVector.from_amplitudes(values, dims, component_count)


def random_hermitian(dim: int, rng: np.random.Generator) -> OperatorMatrix:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return OperatorMatrix((raw + raw.conj().T) / 2)


def random_unitary(dim: int, rng: np.random.Generator) -> OperatorMatrix:
    return OperatorMatrix(unitary_group.rvs(dim, random_state=rng))
