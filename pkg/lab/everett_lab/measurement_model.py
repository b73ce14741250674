"""
everett_lab/measurement_model.py
Generated: 2026-10-17.1010
Purpose: Unitary measurement chain, decoherence bath, branch decomposition and envariance

Provides:
- MeasurementSetup / build_position_detector: Y with one degenerate eigenvalue per recorder
  plus an "outside" eigenvalue, transport unitary U and A = U^dagger Y U
- transport_state: sum_b c_b |a_b> -> sum_b c_b |y_b>
- measure / observe: explicit entangling unitaries (controlled shifts) on the record factors
- decohere: diagonal dephasing of a record label against env qubits in |+>
- extract_branches: projections onto record blocks, weights and residual interference
- EnvarianceSetup / envariance_check: the swap-plus-compensating-phase invariance

Conventions:
- detector and observer registers have dim recorder_count + 1; index 0 is the ready
  state |M_phi>, index r + 1 is the record |M_r>
- the system factor of a measurement chain lives on the span handled by A, written in
  the B-eigenbasis; the outside state is not part of it
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ContractError
from .hilbert_core import (
    DEFAULT_DIMENSION_CAP,
    DEFAULT_TOLERANCES,
    OperatorMatrix,
    StateVector,
    Tolerances,
    check_capacity,
    reduced_density_matrix,
    spectral,
    tensor_all,
)

logger = logging.getLogger("everett_lab.measurement_model")

DEFAULT_INTERFERENCE_TOL = 1e-3
SPECTRUM_TOL = 1e-9
OUTSIDE_LABEL = "outside"
FACTOR_ROLES = ("system", "detector", "observer", "environment")


# =============================================================================
# MEASUREMENT SETUP
# =============================================================================

@dataclass(frozen=True)
class RecorderBlock:
    """One Y-eigenvalue block and the recorder reading it stands for"""
    label: str
    y_value: float
    b_value: Optional[float]
    indices: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class MeasurementSetup:
    """
    Operators of one measurement: B (intended quantity), transport U, recorder
    operator Y, and the recorder map from Y-blocks to labels and B-eigenvalues.
    """
    b_op: OperatorMatrix
    transport: OperatorMatrix
    y_op: OperatorMatrix
    recorder_map: Tuple[RecorderBlock, ...]
    states_per_recorder: int = 1
    kick: Optional[OperatorMatrix] = None

    @cached_property
    def a_op(self) -> OperatorMatrix:
        """A := U^dagger Y U"""
        return self.transport.adjoint() @ self.y_op @ self.transport

    @property
    def recorders(self) -> Tuple[RecorderBlock, ...]:
        return tuple(block for block in self.recorder_map if block.b_value is not None)

    @property
    def recorder_count(self) -> int:
        return len(self.recorders)

    @property
    def measured_dim(self) -> int:
        """Dimension of the span handled by A (recorder blocks only)"""
        return self.recorder_count * self.states_per_recorder

    @property
    def register_dim(self) -> int:
        return self.recorder_count + 1

    @property
    def b_values(self) -> Tuple[float, ...]:
        return tuple(block.b_value for block in self.recorders)

    def recorder_of(self, system_index: int) -> int:
        """Recorder reached by B-eigenbasis vector `system_index` of the measured span"""
        return system_index // self.states_per_recorder

    def eigenstate(self, recorder: int, state_index: int = 0) -> np.ndarray:
        """|a> = U^dagger |y> for the given recorder block member"""
        y_index = self.recorders[recorder].indices[state_index]
        return self.transport.adjoint().entries[:, y_index]

    def verify(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, float]:
        """Residuals of the setup invariants: hermiticity of A, spectrum(A) = spectrum(Y), eigenstate transport"""
        a = self.a_op.entries
        hermiticity = float(np.max(np.abs(a - a.conj().T)))
        y_diag = np.real(np.diag(self.y_op.entries))
        spectrum_error = math.inf
        if hermiticity <= tolerances.equality:
            a_spectrum = spectral(OperatorMatrix(a, tolerances), tolerances=tolerances).eigenvalues
            spectrum_error = float(np.max(np.abs(a_spectrum - np.sort(y_diag))))
        transport_error = 0.0
        for block in self.recorder_map:
            for index in block.indices:
                a_state = self.transport.adjoint().entries[:, index]
                transport_error = max(
                    transport_error,
                    float(np.linalg.norm(a @ a_state - y_diag[index] * a_state)),
                    float(np.linalg.norm(self.transport.entries @ a_state - np.eye(a.shape[0])[:, index])),
                )
        return {
            'a_hermiticity': hermiticity,
            'spectrum_transport': spectrum_error,
            'eigenstate_transport': transport_error,
            'a_hermitian_ok': hermiticity <= tolerances.unitarity,
            'transport_ok': transport_error <= tolerances.unitarity,
            'spectrum_ok': spectrum_error <= SPECTRUM_TOL,
        }


def dft_unitary(dim: int) -> OperatorMatrix:
    """Deterministic default transport: the unitary discrete Fourier matrix"""
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return OperatorMatrix(np.exp(-2j * np.pi * j * k / dim) / np.sqrt(dim))


def build_position_detector(
    recorder_count: int,
    states_per_recorder: int = 1,
    transport: Optional[OperatorMatrix] = None,
    b_values: Optional[Sequence[float]] = None,
    kick: Optional[OperatorMatrix] = None,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> MeasurementSetup:
    """
    Recorders at a row of positions: recorder r has Y-eigenvalue r + 1 with
    multiplicity states_per_recorder; the outside state has Y-eigenvalue 0.

    Y = diag(y_1 ... y_1, y_2 ..., y_R ..., y_out) in the recorder basis.
    """
    if recorder_count < 1:
        raise ContractError(f"recorder_count must be >= 1, got {recorder_count}")
    if states_per_recorder < 1:
        raise ContractError(f"states_per_recorder must be >= 1, got {states_per_recorder}")
    dim = recorder_count * states_per_recorder + 1
    check_capacity(dim * dim, cap, what="detector operator size")

    if b_values is None:
        b_values = [float(r + 1) for r in range(recorder_count)]
    b_values = [float(b) for b in b_values]
    if len(b_values) != recorder_count or len(set(b_values)) != recorder_count:
        raise ContractError("b_values must be distinct, one per recorder")

    y_diag = np.zeros(dim)
    b_diag = np.zeros(dim)
    blocks: List[RecorderBlock] = []
    for r in range(recorder_count):
        indices = tuple(range(r * states_per_recorder, (r + 1) * states_per_recorder))
        y_diag[list(indices)] = r + 1
        b_diag[list(indices)] = b_values[r]
        blocks.append(RecorderBlock(f"recorder-{r + 1}", float(r + 1), b_values[r], indices))
    blocks.append(RecorderBlock(OUTSIDE_LABEL, 0.0, None, (dim - 1,)))

    if transport is None:
        transport = dft_unitary(dim)
    if transport.dim != dim or not transport.is_unitary:
        raise ContractError(f"transport must be a unitary of dim {dim}")
    measured_dim = recorder_count * states_per_recorder
    if kick is not None and (kick.dim != measured_dim or not kick.is_unitary):
        raise ContractError(f"kick must be a unitary of dim {measured_dim}")

    y_op = OperatorMatrix.diagonal(y_diag)
    b_op = transport.adjoint() @ OperatorMatrix.diagonal(b_diag) @ transport
    logger.debug(f"Built position detector: {recorder_count} recorders x {states_per_recorder} states")
    return MeasurementSetup(b_op, transport, y_op, tuple(blocks), states_per_recorder, kick)


def prepare_system_state(setup: MeasurementSetup, coefficients: Sequence[complex]) -> StateVector:
    """
    sum_b c_b |a_b> on the full detector space.

    One coefficient per recorder uses the first state of each block; one per
    measured basis vector fills degenerate blocks explicitly.
    """
    coefficients = np.asarray(coefficients, dtype=complex)
    dim = setup.transport.dim
    values = np.zeros(dim, dtype=complex)
    if coefficients.size == setup.recorder_count:
        for r, c in enumerate(coefficients):
            values += c * setup.eigenstate(r)
    elif coefficients.size == setup.measured_dim:
        for i, c in enumerate(coefficients):
            r = setup.recorder_of(i)
            values += c * setup.eigenstate(r, i % setup.states_per_recorder)
    else:
        raise ContractError(
            f"expected {setup.recorder_count} or {setup.measured_dim} coefficients, got {coefficients.size}"
        )
    return StateVector.from_amplitudes(values, (dim,))


def transport_state(
    setup: MeasurementSetup,
    psi: StateVector,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> StateVector:
    """U psi: the particle enters the recorders; weight outside the A-span is rejected"""
    if psi.dims != (setup.transport.dim,) or psi.component_count != 1:
        raise ContractError(f"psi must live on the detector space of dim {setup.transport.dim}")
    transported = setup.transport.apply(psi)
    outside = setup.recorder_map[-1]
    outside_weight = float(np.sum(np.abs(transported.amplitudes[list(outside.indices)]) ** 2))
    if outside_weight > tolerances.unitarity:
        raise ContractError(f"psi has weight {outside_weight:.3e} outside the span handled by A")
    return transported


def recorder_weights(setup: MeasurementSetup, transported: StateVector) -> Tuple[float, ...]:
    """Squared norms of a transported state on each recorder block"""
    density = np.abs(transported.amplitudes) ** 2
    return tuple(float(density[list(block.indices)].sum()) for block in setup.recorders)


# =============================================================================
# COMPOSITE STATES
# =============================================================================

@dataclass(frozen=True)
class Factor:
    name: str
    dim: int
    role: str


@dataclass(frozen=True, eq=False)
class CompositeState:
    """
    A StateVector over labeled subsystem factors.

    `records` maps a register factor name (detector or observer) to the
    B-eigenvalue carried by each record index 1..R.
    """
    factors: Tuple[Factor, ...]
    state: StateVector
    records: Tuple[Tuple[str, Tuple[float, ...]], ...] = ()

    def __post_init__(self):
        dims = tuple(f.dim for f in self.factors)
        if dims != self.state.dims:
            raise ContractError(f"factor dims {dims} do not match state dims {self.state.dims}")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise ContractError(f"factor names must be unique: {names}")
        for f in self.factors:
            if f.role not in FACTOR_ROLES:
                raise ContractError(f"unknown factor role {f.role!r}")

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ContractError(f"no factor named {name!r}; factors are {self.names}") from None

    def factor(self, name: str) -> Factor:
        return self.factors[self.position(name)]

    def names_with_role(self, role: str) -> Tuple[str, ...]:
        return tuple(f.name for f in self.factors if f.role == role)

    @property
    def record_map(self) -> Dict[str, Tuple[float, ...]]:
        return dict(self.records)

    def with_state(self, state: StateVector, records: Optional[Dict[str, Tuple[float, ...]]] = None) -> "CompositeState":
        record_items = tuple(sorted((records if records is not None else self.record_map).items()))
        return CompositeState(self.factors, state, record_items)

    def populations(self, name: str) -> np.ndarray:
        """Diagonal of the reduced density matrix of one factor"""
        position = self.position(name)
        psi = self.state.as_tensor()
        axes = tuple(a for a in range(psi.ndim) if a != position + 1)
        return np.sum(np.abs(psi) ** 2, axis=axes)

    def reduced(self, keep: Sequence[str]) -> np.ndarray:
        return reduced_density_matrix(self.state, [self.position(name) for name in keep])


def register_ready(dim: int) -> StateVector:
    return StateVector.basis(0, (dim,))


def environment_ready(env_qubits: int) -> StateVector:
    """|+>^n, the bath state the dephasing envelope assumes"""
    dim = 2 ** env_qubits
    return StateVector((dim,), np.full(dim, 1.0 / np.sqrt(dim), dtype=complex))


def _apply_local(state: StateVector, matrix: np.ndarray, positions: Sequence[int]) -> StateVector:
    """Apply a matrix acting on the listed factors (in that order) to a state"""
    psi = state.as_tensor()
    local_dims = [state.dims[p] for p in positions]
    k = len(positions)
    gate = matrix.reshape(local_dims + local_dims)
    axes = [p + 1 for p in positions]
    out = np.tensordot(gate, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return StateVector(state.dims, out.reshape(-1), state.component_count, state.tolerances)


def _require_ready(state: CompositeState, name: str, tolerances: Tolerances) -> None:
    ready = float(state.populations(name)[0])
    if ready < 1.0 - tolerances.unitarity:
        raise ContractError(f"factor {name!r} is not in its ready state (ready population {ready:.6f})")


def measurement_chain(
    coefficients: Sequence[complex],
    setup: Optional[MeasurementSetup] = None,
    states_per_recorder: int = 1,
    with_observer: bool = True,
    env_qubits: int = 0,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> Tuple[MeasurementSetup, CompositeState]:
    """
    System (B-eigenbasis amplitudes c_b) with a ready detector, optionally a
    ready observer and an environment of env_qubits qubits in |+>.
    """
    coefficients = np.asarray(coefficients, dtype=complex)
    if setup is None:
        recorder_count = coefficients.size // states_per_recorder
        setup = build_position_detector(recorder_count, states_per_recorder)
    if coefficients.size != setup.measured_dim:
        raise ContractError(f"expected {setup.measured_dim} coefficients, got {coefficients.size}")

    factors = [Factor("system", setup.measured_dim, "system"), Factor("detector", setup.register_dim, "detector")]
    parts = [StateVector.from_amplitudes(coefficients, (setup.measured_dim,)), register_ready(setup.register_dim)]
    if with_observer:
        factors.append(Factor("observer", setup.register_dim, "observer"))
        parts.append(register_ready(setup.register_dim))
    if env_qubits > 0:
        factors.append(Factor("environment", 2 ** env_qubits, "environment"))
        parts.append(environment_ready(env_qubits))
    return setup, CompositeState(tuple(factors), tensor_all(parts, cap))


# =============================================================================
# MEASUREMENT, OBSERVATION, DECOHERENCE
# =============================================================================

def measurement_unitary(setup: MeasurementSetup) -> OperatorMatrix:
    """
    W = (K (x) 1) . sum_i |i><i| (x) S^(r(i)+1) on system (x) detector, S the
    cyclic shift of the register, so |b>|M_phi> -> K|b>|M_b>.
    """
    n_sys, n_reg = setup.measured_dim, setup.register_dim
    shift = np.roll(np.eye(n_reg), 1, axis=0)
    w = np.zeros((n_sys * n_reg, n_sys * n_reg), dtype=complex)
    for i in range(n_sys):
        projector = np.zeros((n_sys, n_sys))
        projector[i, i] = 1.0
        w += np.kron(projector, np.linalg.matrix_power(shift, setup.recorder_of(i) + 1))
    if setup.kick is not None:
        w = np.kron(setup.kick.entries, np.eye(n_reg)) @ w
    return OperatorMatrix(w)


def copy_unitary(register_dim: int) -> OperatorMatrix:
    """|M_k>|O_l> -> |M_k>|O_(l+k mod d)>; copies a record into a ready observer"""
    shift = np.roll(np.eye(register_dim), 1, axis=0)
    c = np.zeros((register_dim ** 2, register_dim ** 2), dtype=complex)
    for k in range(register_dim):
        projector = np.zeros((register_dim, register_dim))
        projector[k, k] = 1.0
        c += np.kron(projector, np.linalg.matrix_power(shift, k))
    return OperatorMatrix(c)


def measure(
    state: CompositeState,
    setup: MeasurementSetup,
    system: str = "system",
    detector: str = "detector",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CompositeState:
    """sum_b c_b |b> |M_phi> -> sum_b c_b |b>' |M_b>"""
    if state.factor(system).dim != setup.measured_dim:
        raise ContractError(f"system factor {system!r} must have dim {setup.measured_dim}")
    if state.factor(detector).dim != setup.register_dim:
        raise ContractError(f"detector factor {detector!r} must have dim {setup.register_dim}")
    _require_ready(state, detector, tolerances)
    w = measurement_unitary(setup)
    evolved = _apply_local(state.state, w.entries, [state.position(system), state.position(detector)])
    records = state.record_map
    records[detector] = setup.b_values
    return state.with_state(evolved, records)


def observe(
    state: CompositeState,
    detector: str = "detector",
    observer: str = "observer",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CompositeState:
    """The observer copies the detector record; the detector's reduced state is untouched"""
    records = state.record_map
    if detector not in records:
        raise ContractError(f"detector {detector!r} carries no record; measure first")
    register_dim = state.factor(detector).dim
    if state.factor(observer).dim != register_dim:
        raise ContractError(f"observer {observer!r} must have the detector's dim {register_dim}")
    _require_ready(state, observer, tolerances)
    c = copy_unitary(register_dim)
    evolved = _apply_local(state.state, c.entries, [state.position(detector), state.position(observer)])
    records[observer] = records[detector]
    return state.with_state(evolved, records)


def dephasing_envelope(label_gap: float, env_qubits: int, coupling: float, t: float) -> float:
    """Closed-form |<E_k|E_k'>| = |cos(g t (lambda_k - lambda_k'))|^n for |+>^n baths"""
    return float(abs(np.cos(coupling * t * label_gap)) ** env_qubits)


def decohere(
    state: CompositeState,
    env_qubits: int,
    coupling: float,
    t: float,
    detector: str = "detector",
    environment: str = "environment",
) -> CompositeState:
    """
    Evolve under H = g L (x) sum_q sigma_z^(q), L = diag(0, 1, ..., R) on the
    detector register; H is diagonal so exp(-i H t) is a phase per basis pair.
    """
    if env_qubits == 0:
        return state
    env = state.factor(environment)
    if env.dim != 2 ** env_qubits:
        raise ContractError(f"environment {environment!r} has dim {env.dim}, expected {2 ** env_qubits}")
    if coupling == 0.0 or t == 0.0:
        return state

    det_pos, env_pos = state.position(detector), state.position(environment)
    labels = np.arange(state.factor(detector).dim, dtype=float)
    env_index = np.arange(env.dim)
    popcount = np.array([bin(e).count("1") for e in env_index])
    z_total = env_qubits - 2 * popcount
    phases = np.exp(-1j * coupling * t * np.outer(labels, z_total))

    psi = state.state.as_tensor()
    shape = [1] * psi.ndim
    if det_pos < env_pos:
        shape[det_pos + 1], shape[env_pos + 1] = phases.shape
        broadcast = phases.reshape(shape)
    else:
        shape[env_pos + 1], shape[det_pos + 1] = phases.shape[::-1]
        broadcast = phases.T.reshape(shape)
    evolved = StateVector(state.state.dims, (psi * broadcast).reshape(-1),
                          state.state.component_count, state.state.tolerances)
    logger.debug(f"Decohered {detector!r} against {env_qubits} qubits (g={coupling}, t={t})")
    return state.with_state(evolved)


# =============================================================================
# BRANCH DECOMPOSITION
# =============================================================================

@dataclass(frozen=True)
class BranchRecord:
    labels: Tuple[float, ...]
    weight: float
    record_indices: Tuple[int, ...]
    branch_state: Optional[CompositeState] = None


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    branches: Tuple[BranchRecord, ...]
    interference: np.ndarray
    interference_tol: float = DEFAULT_INTERFERENCE_TOL

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.branches])

    @property
    def weight_sum(self) -> float:
        return float(np.sum(self.weights))

    @property
    def max_interference(self) -> float:
        if len(self.branches) < 2:
            return 0.0
        off_diagonal = self.interference[~np.eye(len(self.branches), dtype=bool)]
        return float(np.max(off_diagonal))

    @property
    def decohered(self) -> bool:
        """Branching is valid once every pairwise residual overlap is below tolerance"""
        return self.max_interference <= self.interference_tol

    def weight_of(self, labels: Sequence[float]) -> float:
        key = tuple(float(v) for v in labels)
        return float(sum(b.weight for b in self.branches if b.labels == key))


def _nuclear_overlap(left: Tuple[np.ndarray, np.ndarray], right: Tuple[np.ndarray, np.ndarray]) -> float:
    """Trace norm of A_i A_j^dagger from thin-SVD factors (S, Vh) of each A"""
    s_i, vh_i = left
    s_j, vh_j = right
    core = (s_i[:, None] * vh_i) @ (vh_j.conj().T * s_j[None, :])
    return float(np.sum(np.linalg.svd(core, compute_uv=False)))


def extract_branches(
    state: CompositeState,
    interference_tol: float = DEFAULT_INTERFERENCE_TOL,
    detectors: Optional[Sequence[str]] = None,
    environment: str = "environment",
    keep_states: bool = True,
) -> BranchEnsemble:
    """
    Split a post-measurement state into branches, one per combination of
    detector records with nonzero weight.

    The interference entry (i, j) is the trace norm of Tr_env |B_i><B_j| for the
    normalized branch states, i.e. the magnitude of their environment overlap.
    Without an environment factor nothing suppresses interference and every
    off-diagonal entry is 1.
    """
    records = state.record_map
    if detectors is None:
        detectors = tuple(name for name in state.names_with_role("detector") if name in records)
    if not detectors:
        raise ContractError("no detector factor carries records; measure first")
    for name in detectors:
        if name not in records:
            raise ContractError(f"detector {name!r} carries no records")

    psi = state.state.as_tensor()
    det_axes = [state.position(name) + 1 for name in detectors]
    other_axes = tuple(a for a in range(psi.ndim) if a not in det_axes)
    weight_tensor = np.sum(np.abs(psi) ** 2, axis=other_axes)
    # sum keeps detector axes in increasing position order
    order = np.argsort(det_axes)
    weight_tensor = np.transpose(weight_tensor, np.argsort(order))

    has_env = environment in state.names and state.factor(environment).dim > 1
    env_axis = state.position(environment) + 1 if has_env else None

    branches: List[BranchRecord] = []
    factors: List[Tuple[np.ndarray, np.ndarray]] = []
    record_ranges = [range(1, state.factor(name).dim) for name in detectors]
    for combo in product(*record_ranges):
        weight = float(weight_tensor[combo])
        if weight <= 0.0:
            continue
        labels = tuple(records[name][index - 1] for name, index in zip(detectors, combo))
        index = [slice(None)] * psi.ndim
        for axis, value in zip(det_axes, combo):
            index[axis] = value
        block = psi[tuple(index)] / np.sqrt(weight)

        branch_state = None
        if keep_states:
            embedded = np.zeros_like(psi)
            embedded[tuple(index)] = block
            branch_state = state.with_state(
                StateVector(state.state.dims, embedded.reshape(-1),
                            state.state.component_count, state.state.tolerances)
            )
        if has_env:
            remaining = [a for a in range(psi.ndim) if a not in det_axes]
            env_position = remaining.index(env_axis)
            matrix = np.moveaxis(block, env_position, -1).reshape(-1, state.factor(environment).dim)
            _, s, vh = np.linalg.svd(matrix, full_matrices=False)
            factors.append((s, vh))
        branches.append(BranchRecord(labels, weight, tuple(combo), branch_state))

    n = len(branches)
    if has_env:
        interference = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                interference[i, j] = interference[j, i] = _nuclear_overlap(factors[i], factors[j])
    else:
        interference = np.ones((n, n))

    ensemble = BranchEnsemble(tuple(branches), interference, interference_tol)
    if has_env and not ensemble.decohered:
        logger.warning(
            f"Ensemble not yet decohered: max interference {ensemble.max_interference:.3e} "
            f"> tolerance {interference_tol:.1e}"
        )
    return ensemble


def repeated_measurement(
    coefficients: Sequence[complex],
    n_measurements: int,
    setup: Optional[MeasurementSetup] = None,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> Tuple[MeasurementSetup, CompositeState]:
    """
    N identically prepared systems, each measured by a fresh detector register,
    in sequence; the registers together hold the record |M_(b1...bN)>.
    """
    if n_measurements < 1:
        raise ContractError(f"n_measurements must be >= 1, got {n_measurements}")
    coefficients = np.asarray(coefficients, dtype=complex)
    if setup is None:
        setup = build_position_detector(coefficients.size)
    if coefficients.size != setup.measured_dim:
        raise ContractError(f"expected {setup.measured_dim} coefficients, got {coefficients.size}")

    check_capacity((setup.measured_dim * setup.register_dim) ** n_measurements, cap)
    system = StateVector.from_amplitudes(coefficients, (setup.measured_dim,))
    factors: List[Factor] = []
    parts: List[StateVector] = []
    for i in range(1, n_measurements + 1):
        factors += [Factor(f"system[{i}]", setup.measured_dim, "system"),
                    Factor(f"detector[{i}]", setup.register_dim, "detector")]
        parts += [system, register_ready(setup.register_dim)]
    state = CompositeState(tuple(factors), tensor_all(parts, cap))
    for i in range(1, n_measurements + 1):
        state = measure(state, setup, system=f"system[{i}]", detector=f"detector[{i}]")
    logger.info(f"Completed {n_measurements} sequential measurements ({state.state.dimension} amplitudes)")
    return setup, state


# =============================================================================
# ENVARIANCE
# =============================================================================

@dataclass(frozen=True, eq=False)
class EnvarianceSetup:
    """
    |Psi> = c1 |1>|e1> + c2 |2>|e2> with U_e = swap on the system and
    |e1> -> e^{i phi}|e2>, |e2> -> e^{-i phi}|e1> on the environment.
    """
    c1: complex
    c2: complex
    phase: float
    swap_unitary: OperatorMatrix
    env_basis: np.ndarray = field(repr=False)

    @property
    def env_dim(self) -> int:
        return self.env_basis.shape[0]

    def state(self) -> StateVector:
        one, two = np.eye(2)
        e1, e2 = self.env_basis[:, 0], self.env_basis[:, 1]
        values = self.c1 * np.kron(one, e1) + self.c2 * np.kron(two, e2)
        return StateVector.from_amplitudes(values, (2, self.env_dim))


def build_envariance_setup(
    c1: complex,
    c2: complex,
    env_basis: Optional[np.ndarray] = None,
    env_dim: int = 2,
) -> EnvarianceSetup:
    """Phase phi is read off c2 = c1 e^{i phi}; env_basis columns are |e1>, |e2>"""
    if env_basis is None:
        env_basis = np.eye(env_dim, dtype=complex)[:, :2]
    env_basis = np.asarray(env_basis, dtype=complex)
    if env_basis.ndim != 2 or env_basis.shape[1] != 2 or env_basis.shape[0] < 2:
        raise ContractError("env_basis must hold two column vectors of dim >= 2")
    if np.max(np.abs(env_basis.conj().T @ env_basis - np.eye(2))) > DEFAULT_TOLERANCES.unitarity:
        raise ContractError("env_basis columns must be orthonormal")

    phase = float(np.angle(c2) - np.angle(c1))
    e1, e2 = env_basis[:, 0], env_basis[:, 1]
    dim = env_basis.shape[0]
    env_map = (np.eye(dim) - np.outer(e1, e1.conj()) - np.outer(e2, e2.conj())
               + np.exp(1j * phase) * np.outer(e2, e1.conj())
               + np.exp(-1j * phase) * np.outer(e1, e2.conj()))
    system_swap = np.array([[0, 1], [1, 0]], dtype=complex)
    swap_unitary = OperatorMatrix(np.kron(system_swap, env_map))
    if not swap_unitary.is_unitary:
        raise ContractError("U_e is not unitary; check the environment basis")
    return EnvarianceSetup(complex(c1), complex(c2), phase, swap_unitary, env_basis)


def envariance_check(setup: EnvarianceSetup) -> float:
    """||U_e|Psi> - |Psi>||; zero (to rounding) exactly when |c1| = |c2|"""
    psi = setup.state()
    swapped = setup.swap_unitary.apply(psi)
    return float(np.linalg.norm(swapped.amplitudes - psi.amplitudes))
