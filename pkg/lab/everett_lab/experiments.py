"""
everett_lab/experiments.py
Generated: 2026-10-17.1540
Purpose: One experiment class per experiment id

Each experiment takes its validated parameter model, runs the numerical
checks and returns an ExperimentResult: pass/fail checks, CSV tables (by
relative file name) and a JSON-ready summary. Randomness comes only from the
generator handed in by the runner, seeded from the config.
"""

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Type

import numpy as np

from . import branch_statistics as bs
from . import measurement_model as mm
from . import wavepacket_lab as wp
from .config import (
    ChebyshevParameters,
    DecoherenceParameters,
    EnvarianceParameters,
    EstimatorParameters,
    ExperimentId,
    FrequencyParameters,
    MeasureChainParameters,
    RepeatedParameters,
    WavepacketParameters,
)
from .hilbert_core import DEFAULT_DIMENSION_CAP, DEFAULT_TOLERANCES, Tolerances, random_state, random_unitary

logger = logging.getLogger("everett_lab.experiments")

FIGURE_POINTS = 1001


@dataclass
class Check:
    """One pass/fail verdict; `value` is compared against `threshold` as described by `relation`"""
    name: str
    passed: bool
    value: float
    threshold: float
    relation: str = "<="

    def to_dict(self) -> Dict[str, Any]:
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in asdict(self).items()}


def check_at_most(name: str, value: float, threshold: float) -> Check:
    return Check(name, bool(value <= threshold), float(value), float(threshold), "<=")


def check_at_least(name: str, value: float, threshold: float) -> Check:
    return Check(name, bool(value >= threshold), float(value), float(threshold), ">=")


def check_greater(name: str, value: float, threshold: float) -> Check:
    return Check(name, bool(value > threshold), float(value), float(threshold), ">")


@dataclass
class ExperimentResult:
    checks: List[Check] = field(default_factory=list)
    tables: Dict[str, str] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def csv_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Comma-separated, header row first, floats at 17 significant digits"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(float(v), ".17g") if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def _normalized(amplitudes: Sequence[complex]) -> np.ndarray:
    values = np.asarray(amplitudes, dtype=complex)
    return values / np.linalg.norm(values)


class Experiment:
    """Base class: subclasses set `experiment_id` and implement run()"""

    experiment_id: ExperimentId

    def __init__(self, params, rng: np.random.Generator, tolerances: Tolerances = DEFAULT_TOLERANCES,
                 cap: int = DEFAULT_DIMENSION_CAP):
        self.params = params
        self.rng = rng
        self.tolerances = tolerances
        self.cap = cap

    def run(self) -> ExperimentResult:
        raise NotImplementedError


# =============================================================================
# MEASUREMENT EXPERIMENTS
# =============================================================================

class MeasureChainExperiment(Experiment):
    """System, detector, observer (and optional bath): Born weights of the recorder branches"""

    experiment_id = ExperimentId.MEASURE_CHAIN

    def run(self) -> ExperimentResult:
        p: MeasureChainParameters = self.params
        result = ExperimentResult()
        coefficients = _normalized(p.amplitudes())

        setup, state = mm.measurement_chain(coefficients, states_per_recorder=p.states_per_recorder,
                                            with_observer=p.with_observer, env_qubits=p.env_qubits, cap=self.cap)
        verified = setup.verify(self.tolerances)
        result.checks.append(check_at_most("setup_invariants", max(verified['a_hermiticity'],
                                                                    verified['eigenstate_transport']),
                                           self.tolerances.unitarity))
        result.checks.append(check_at_most("spectrum_transport", verified['spectrum_transport'], mm.SPECTRUM_TOL))
        state = mm.measure(state, setup, tolerances=self.tolerances)
        if p.with_observer:
            state = mm.observe(state, tolerances=self.tolerances)
            joint = np.real(np.diag(state.reduced(["detector", "observer"]))).reshape(setup.register_dim, -1)
            disagreement = float(joint.sum() - np.trace(joint))
            result.checks.append(check_at_most("observer_agrees_with_detector", disagreement,
                                               self.tolerances.equality))
        if p.env_qubits:
            state = mm.decohere(state, p.env_qubits, p.coupling, p.time)

        ensemble = mm.extract_branches(state, keep_states=False)
        probabilities = np.abs(coefficients) ** 2
        expected = [float(np.sum(probabilities[r * p.states_per_recorder:(r + 1) * p.states_per_recorder]))
                    for r in range(setup.recorder_count)]
        observed = [ensemble.weight_of((b,)) for b in setup.b_values]
        born_error = max(abs(o - e) for o, e in zip(observed, expected))
        result.checks.append(check_at_most("born_weights", born_error, self.tolerances.unitarity))
        result.checks.append(check_at_most("weight_sum", abs(ensemble.weight_sum - 1.0), self.tolerances.unitarity))

        random_error = self._random_born_identity(p)
        if p.random_states:
            result.checks.append(check_at_most("born_weights_random_states", random_error, self.tolerances.unitarity))

        result.tables["branches.csv"] = csv_table(
            ["b_value", "weight", "expected"],
            [(float(b), o, e) for b, o, e in zip(setup.b_values, observed, expected)],
        )
        result.summary = {
            'recorders': setup.recorder_count,
            'branches': len(ensemble.branches),
            'max_interference': ensemble.max_interference,
            'decohered': ensemble.decohered,
            'random_states': p.random_states,
        }
        return result

    def _random_born_identity(self, p: MeasureChainParameters) -> float:
        worst = 0.0
        for _ in range(p.random_states):
            dim = int(self.rng.integers(p.random_min_dim, p.random_max_dim + 1))
            psi = random_state((dim,), self.rng)
            setup, state = mm.measurement_chain(psi.amplitudes, with_observer=False, cap=self.cap)
            ensemble = mm.extract_branches(mm.measure(state, setup, tolerances=self.tolerances), keep_states=False)
            probabilities = np.abs(psi.amplitudes) ** 2
            for b, prob in zip(setup.b_values, probabilities):
                worst = max(worst, abs(ensemble.weight_of((b,)) - prob))
        return worst


class RepeatedExperiment(Experiment):
    """N systems measured in sequence: product weights and the binomial count law"""

    experiment_id = ExperimentId.REPEATED

    def run(self) -> ExperimentResult:
        p: RepeatedParameters = self.params
        result = ExperimentResult()
        coefficients = _normalized(p.amplitudes())
        probabilities = np.abs(coefficients) ** 2
        n = p.n_measurements

        setup, state = mm.repeated_measurement(coefficients, n, cap=self.cap)
        ensemble = mm.extract_branches(state, keep_states=False)
        index_of = {b: i for i, b in enumerate(setup.b_values)}
        target_label = setup.b_values[p.target]

        rows = []
        worst = 0.0
        counts = np.zeros(n + 1)
        for branch in ensemble.branches:
            expected = math.prod(float(probabilities[index_of[b]]) for b in branch.labels)
            worst = max(worst, abs(branch.weight - expected))
            counts[sum(1 for b in branch.labels if b == target_label)] += branch.weight
            rows.append((" ".join(str(int(b)) for b in branch.labels), branch.weight, expected))
        result.checks.append(check_at_most("product_weights", worst, self.tolerances.unitarity))
        result.checks.append(check_at_most("weight_sum", abs(ensemble.weight_sum - 1.0), self.tolerances.unitarity))

        binomial = bs.frequency_operator_density(coefficients, n, p.target)
        result.checks.append(check_at_most("count_law", float(np.max(np.abs(counts - binomial.density))),
                                           self.tolerances.unitarity))

        result.tables["branches.csv"] = csv_table(["record", "weight", "expected"], rows)
        result.tables["counts.csv"] = csv_table(["m", "weight", "binomial"],
                                                [(m, counts[m], binomial.density[m]) for m in range(n + 1)])
        result.summary = {'n_measurements': n, 'branches': len(ensemble.branches),
                          'amplitudes': state.state.dimension}
        return result


class DecoherenceExperiment(Experiment):
    """Branch interference under the dephasing bath against the closed-form envelope"""

    experiment_id = ExperimentId.DECOHERENCE

    def _interference(self, coefficients: np.ndarray, env_qubits: int, t: float) -> mm.BranchEnsemble:
        setup, state = mm.measurement_chain(coefficients, with_observer=False, env_qubits=env_qubits, cap=self.cap)
        state = mm.decohere(mm.measure(state, setup, tolerances=self.tolerances), env_qubits, self.params.coupling, t)
        return mm.extract_branches(state, interference_tol=self.params.threshold, keep_states=False)

    def run(self) -> ExperimentResult:
        p: DecoherenceParameters = self.params
        result = ExperimentResult()
        coefficients = _normalized(p.amplitudes())
        if np.count_nonzero(np.abs(coefficients) > 0) < 2:
            logger.warning("Fewer than two nonzero amplitudes: no pairwise interference to measure")

        rows = []
        worst = 0.0
        by_gap: Dict[int, List[Tuple[int, float]]] = {}
        for n_env in p.env_qubits:
            ensemble = self._interference(coefficients, n_env, p.time)
            for i, a in enumerate(ensemble.branches):
                for j in range(i + 1, len(ensemble.branches)):
                    gap = abs(a.record_indices[0] - ensemble.branches[j].record_indices[0])
                    closed_form = mm.dephasing_envelope(gap, n_env, p.coupling, p.time)
                    measured = float(ensemble.interference[i, j])
                    worst = max(worst, abs(measured - closed_form))
                    rows.append((n_env, gap, measured, closed_form))
                    by_gap.setdefault(gap, []).append((n_env, measured))
        result.checks.append(check_at_most("envelope_closed_form", worst, p.envelope_tolerance))

        # more bath qubits never restore interference for a fixed label gap
        rises = 0
        for series in by_gap.values():
            values = [measured for _, measured in sorted(series)]
            rises += sum(1 for before, after in zip(values, values[1:]) if after > before + p.envelope_tolerance)
        result.checks.append(check_at_most("interference_non_increasing", rises, 0))

        unit_envelope = abs(math.cos(p.coupling * p.time))
        threshold_qubits = (math.ceil(math.log(p.threshold) / math.log(unit_envelope))
                            if 0.0 < unit_envelope < 1.0 else None)

        strong = self._interference(coefficients, max(p.env_qubits), p.decohered_time)
        result.checks.append(check_at_most("decohered_at_strong_coupling", strong.max_interference, p.threshold))

        result.tables["interference.csv"] = csv_table(["env_qubits", "label_gap", "interference", "envelope"], rows)
        result.summary = {'threshold_qubits': threshold_qubits, 'g_t': p.coupling * p.time,
                          'strong_max_interference': strong.max_interference}
        return result


class EnvarianceExperiment(Experiment):
    """Swap-and-compensate invariance of entangled system-environment states"""

    experiment_id = ExperimentId.ENVARIANCE

    def _random_basis(self, env_dim: int) -> np.ndarray:
        return random_unitary(env_dim, self.rng).entries[:, :2]

    def run(self) -> ExperimentResult:
        p: EnvarianceParameters = self.params
        result = ExperimentResult()
        norm = math.hypot(p.c1, p.c2)
        c1 = p.c1 / norm * complex(math.cos(p.phase1), math.sin(p.phase1))
        c2 = p.c2 / norm * complex(math.cos(p.phase2), math.sin(p.phase2))
        configured = mm.envariance_check(mm.build_envariance_setup(c1, c2, env_dim=p.env_dim))
        equal = math.isclose(p.c1, p.c2, rel_tol=1e-12)
        if equal:
            result.checks.append(check_at_most("configured_envariant", configured, self.tolerances.unitarity))
        else:
            result.checks.append(check_greater("configured_not_envariant", configured, self.tolerances.unitarity))

        rows = [("configured", 0, configured)]
        equal_worst, unequal_best = 0.0, math.inf
        small, large = math.sqrt(p.unequal_weight), math.sqrt(1.0 - p.unequal_weight)
        for trial in range(p.random_trials):
            phi1, phi2 = self.rng.uniform(0.0, 2.0 * math.pi, size=2)
            basis = self._random_basis(p.env_dim)
            balanced = mm.build_envariance_setup(np.exp(1j * phi1) / math.sqrt(2.0), np.exp(1j * phi2) / math.sqrt(2.0),
                                                 env_basis=basis)
            skewed = mm.build_envariance_setup(small * np.exp(1j * phi1), large * np.exp(1j * phi2), env_basis=basis)
            d_equal, d_unequal = mm.envariance_check(balanced), mm.envariance_check(skewed)
            equal_worst = max(equal_worst, d_equal)
            unequal_best = min(unequal_best, d_unequal)
            rows += [("equal", trial, d_equal), ("unequal", trial, d_unequal)]
        if p.random_trials:
            result.checks.append(check_at_most("random_equal_magnitudes", equal_worst, self.tolerances.unitarity))
            result.checks.append(check_greater("random_unequal_magnitudes", unequal_best, 0.05))

        result.tables["envariance.csv"] = csv_table(["case", "trial", "distance"], rows)
        result.summary = {'distance': configured, 'equal_magnitudes': equal,
                          'expected_unequal_distance': math.sqrt(2.0) * abs(small - large)}
        return result


# =============================================================================
# BRANCH STATISTICS EXPERIMENTS
# =============================================================================

def figure_table_text(n_trials: int, rho_u: float, points: int = FIGURE_POINTS) -> str:
    """
    z on an even grid over [0, 1]; the Gaussian rho(z|u), the exact histogram
    at dz = N^(-1/2) and the observer's estimate density P(rho_u | P_u = z).
    """
    z = np.linspace(0.0, 1.0, points)
    gaussian = bs.relative_frequency_value(z, n_trials, rho_u)
    coarse = bs.coarse_histogram(n_trials, rho_u, n_trials ** -0.5)
    slots = coarse.spec.position(coarse.spec.interval_of_count(z * n_trials, n_trials))
    histogram = coarse.histogram.density[slots]
    interior = (z > 0.0) & (z < 1.0)
    estimate = np.zeros(points)
    estimate[interior] = bs.observer_estimate_density(n_trials, rho_u, z[interior])
    return csv_table(["z", "rho_z", "histogram", "observer_estimate"], zip(z, gaussian, histogram, estimate))


class FrequencyExperiment(Experiment):
    """Exact count law, its Gaussian limit, coarse histograms and the frequency operator"""

    experiment_id = ExperimentId.FREQUENCY

    def run(self) -> ExperimentResult:
        p: FrequencyParameters = self.params
        result = ExperimentResult()
        delta_z = p.delta_z if p.delta_z is not None else p.N ** -0.5
        exact = bs.exact_count_density(p.N, p.rho_u)
        result.checks.append(check_at_most("exact_normalized", abs(exact.total_mass() - 1.0), 1e-10))

        curve = bs.relative_frequency_density(p.N, p.rho_u, p.curve_points)
        expected_peak = math.sqrt(p.N / (2.0 * math.pi * p.rho_u * (1.0 - p.rho_u)))
        peak_error = abs(float(curve.density.max()) - expected_peak) / expected_peak
        result.checks.append(check_at_most("curve_peak_height", peak_error, p.peak_tolerance))
        result.checks.append(check_at_most("curve_peak_location", abs(curve.peak_support - p.rho_u),
                                           0.5 / (p.curve_points - 1) + 1e-12))
        result.checks.append(check_at_most("curve_integral", abs(curve.total_mass() - 1.0), 1e-6))

        coarse = bs.coarse_histogram(p.N, p.rho_u, delta_z, exact=exact)
        distance = bs.histogram_gaussian_distance(coarse)
        result.checks.append(check_at_most("histogram_vs_gaussian", distance['relative_distance'],
                                           p.histogram_tolerance))
        result.checks.append(check_at_most("histogram_mass", abs(coarse.histogram.total_mass() - 1.0), 1e-9))

        limit_rows, worst_ratio = self._gaussian_limit(p)
        result.checks.append(check_at_least("gaussian_limit_order", worst_ratio, p.limit_min_ratio))
        result.tables["gaussian_limit.csv"] = csv_table(["rho_u", "N", "sup_error"], limit_rows)

        amplitudes = [math.sqrt(p.rho_u), math.sqrt(1.0 - p.rho_u)]
        operator_bars = bs.frequency_operator_density(amplitudes, p.N, 0, coarse=delta_z)
        result.checks.append(check_at_most("coarse_operator_matches_histogram",
                                           float(np.max(np.abs(operator_bars.density - coarse.bar_graph.density))),
                                           1e-12))

        result.checks.append(check_at_most("dual_path_frequency_operator", self._dual_path_error(p), 1e-12))
        explicit_var = bs.hartle_variance(amplitudes, p.explicit_max_n, 0, method="explicit", cap=self.cap)
        combinatorial_var = bs.hartle_variance(amplitudes, p.explicit_max_n, 0)
        result.checks.append(check_at_most("hartle_variance_paths", abs(explicit_var - combinatorial_var), 1e-12))

        result.tables["exact_count.csv"] = exact.to_csv_text()
        result.tables["coarse_histogram.csv"] = coarse.bar_graph.to_csv_text()
        result.tables["figure.csv"] = figure_table_text(p.N, p.rho_u)
        result.summary = {
            'delta_z': delta_z,
            'central_mass': coarse.central_mass,
            'hartle_variance': bs.hartle_variance(amplitudes, p.N, 0),
            'coarse_eigen_residual': bs.coarse_eigen_residual(p.N, p.rho_u, delta_z),
            'gaussian_peak': expected_peak,
            'histogram_relative_distance': distance['relative_distance'],
            'validity_warning': curve.validity_warning,
        }
        return result

    @staticmethod
    def _gaussian_limit(p: FrequencyParameters):
        """Error reduction per decade of N, worst over the rho_u list"""
        rows = []
        worst = math.inf
        for rho_u in p.limit_rho_u:
            errors = [bs.gaussian_limit_error(n, rho_u) for n in p.limit_n]
            rows.extend((rho_u, n, err) for n, err in zip(p.limit_n, errors))
            for (n0, e0), (n1, e1) in zip(zip(p.limit_n, errors), zip(p.limit_n[1:], errors[1:])):
                decades = math.log10(n1 / n0)
                worst = min(worst, (e0 / e1) ** (1.0 / decades) if e1 > 0.0 else math.inf)
        return rows, worst

    def _dual_path_error(self, p: FrequencyParameters) -> float:
        worst = 0.0
        for _ in range(p.random_amplitude_sets):
            dim = int(self.rng.integers(2, 5))
            n = int(self.rng.integers(1, p.explicit_max_n + 1))
            target = int(self.rng.integers(dim))
            amplitudes = random_state((dim,), self.rng).amplitudes
            explicit = bs.frequency_operator_density(amplitudes, n, target, method="explicit", cap=self.cap)
            combinatorial = bs.frequency_operator_density(amplitudes, n, target)
            worst = max(worst, float(np.max(np.abs(explicit.density - combinatorial.density))))
        return worst


class ChebyshevExperiment(Experiment):
    """Tail mass outside the central interval against the Chebyshev bound"""

    experiment_id = ExperimentId.CHEBYSHEV

    def run(self) -> ExperimentResult:
        p: ChebyshevParameters = self.params
        result = ExperimentResult()
        report = bs.chebyshev_bound_check(p.N, p.rho_u, p.delta_z)
        result.checks.append(check_at_most("bound_holds", report.tail_mass, report.bound))
        result.summary = {'tail_mass': report.tail_mass, 'bound': report.bound, 'holds': report.holds}
        if p.sweep:
            self._sweep(p, result)
        return result

    def _sweep(self, p: ChebyshevParameters, result: ExperimentResult) -> None:
        rows = []
        violations = 0
        non_monotone = 0
        for rho_u in p.sweep_rho_u:
            previous: Dict[float, float] = {}
            for n_trials in sorted(p.sweep_n):
                exact = bs.exact_count_density(n_trials, rho_u)
                for delta_z in p.sweep_delta_z:
                    report = bs.chebyshev_bound_check(n_trials, rho_u, delta_z, exact=exact)
                    central = bs.coarse_histogram(n_trials, rho_u, delta_z, exact=exact).central_mass
                    violations += not report.holds
                    if delta_z in previous and central < previous[delta_z] - 1e-12:
                        non_monotone += 1
                    previous[delta_z] = central
                    rows.append((n_trials, rho_u, delta_z, report.tail_mass, report.bound,
                                 int(report.holds), central))
        logger.info(f"Chebyshev sweep: {len(rows)} points, {violations} violations")
        result.checks.append(check_at_most("sweep_violations", violations, 0))
        result.checks.append(check_at_most("central_mass_nondecreasing", non_monotone, 0))
        result.tables["chebyshev_sweep.csv"] = csv_table(
            ["N", "rho_u", "delta_z", "tail_mass", "bound", "holds", "central_mass"], rows)
        result.summary['sweep_points'] = len(rows)


class EstimatorExperiment(Experiment):
    """Branch-weighted posterior for P_u concentrating around rho_u"""

    experiment_id = ExperimentId.ESTIMATOR

    def run(self) -> ExperimentResult:
        p: EstimatorParameters = self.params
        result = ExperimentResult()
        low, high = p.rho_u - p.window, p.rho_u + p.window
        masses = []
        for n_trials in p.ladder:
            dist = bs.estimator_distribution(n_trials, p.rho_u, bs.Prior(p.prior), p.grid_points)
            masses.append(dist.mass_within(low, high))
        final = bs.estimator_distribution(p.N, p.rho_u, bs.Prior(p.prior), p.grid_points)
        final_mass = final.mass_within(low, high)

        result.checks.append(check_at_least("mass_near_rho_u", final_mass, p.min_mass))
        drops = sum(1 for a, b in zip(masses, masses[1:]) if b < a - 1e-12)
        result.checks.append(check_at_most("mass_increases_with_n", drops, 0))
        result.checks.append(check_at_most("posterior_normalized", abs(final.total_mass() - 1.0), 1e-9))

        result.tables["estimator.csv"] = final.to_csv_text()
        result.tables["estimator_ladder.csv"] = csv_table(["N", "mass_within_window"], zip(p.ladder, masses))
        result.summary = {'mass_within_window': final_mass, 'posterior_mean': final.mean(),
                          'window': [low, high]}
        return result


# =============================================================================
# WAVEPACKET EXPERIMENT
# =============================================================================

class WavepacketExperiment(Experiment):
    """The density-interpretation relations on a 1-D grid"""

    experiment_id = ExperimentId.WAVEPACKET

    def run(self) -> ExperimentResult:
        p: WavepacketParameters = self.params
        result = ExperimentResult()
        grid = wp.Grid(p.x_min, p.x_max, p.n_points, p.mass, p.hbar)
        center = 0.5 * (p.x_min + p.x_max)
        harmonic = wp.harmonic_potential(grid, p.omega, center)
        ground = wp.stationary_state(grid, harmonic, 0)

        # norm conservation and stationarity
        packet = wp.gaussian_packet(grid, center, p.sigma, p.k0, harmonic)
        _, diagnostics = wp.propagate_with_diagnostics(packet, p.dt, p.steps, p.scheme)
        result.checks.append(check_at_most("norm_drift", diagnostics['drift'], wp.CUMULATIVE_DRIFT_TOL))
        settled = wp.propagate(ground, p.dt, 100, p.scheme)
        result.checks.append(check_at_most("stationary_density", float(np.max(np.abs(settled.density - ground.density))),
                                            1e-8))

        # free spreading
        free = wp.gaussian_packet(grid, center, p.sigma)
        spread_steps = max(1, round(p.t_max / p.dt))
        spread = wp.propagate(free, p.dt, spread_steps, p.scheme)
        expected_width = wp.free_width(spread_steps * p.dt, p.sigma, p.mass, p.hbar)
        width_error = abs(wp.packet_width(spread) - expected_width) / expected_width
        result.checks.append(check_at_most("free_spreading", width_error, 1e-4))

        ratio, constant = self._continuity_order(grid, center, p)
        result.checks.append(Check("continuity_order", bool(3.0 <= ratio <= 5.0), ratio, 4.0, "~"))

        # first-order perturbation
        offset = grid.x - center
        odd = wp.perturbation_energy(ground, offset)
        result.checks.append(check_at_most("perturbation_odd", abs(odd), 1e-10))
        first_order = wp.perturbation_energy(ground, offset ** 2)
        expected = p.hbar / (2.0 * p.mass * p.omega)
        result.checks.append(check_at_most("perturbation_quadratic", abs(first_order - expected) / expected, 1e-6))
        slope = self._rediagonalization_slope(ground, offset ** 2, first_order, p.lambdas)
        result.checks.append(Check("rediagonalization_order", bool(0.8 <= slope <= 1.2), slope, 1.0, "~"))

        # Ehrenfest: two widths, one trajectory
        start = center - 2.0
        narrow = wp.ehrenfest_check(wp.gaussian_packet(grid, start, p.sigma, p.k0), p.force, p.t_max,
                                    scheme=p.scheme)
        wide = wp.ehrenfest_check(wp.gaussian_packet(grid, start, 1.5 * p.sigma, p.k0), p.force, p.t_max,
                                  scheme=p.scheme)
        result.checks.append(check_at_most("ehrenfest", narrow.max_deviation, 1e-5))
        result.checks.append(check_at_most("ehrenfest_width_independence",
                                           float(np.max(np.abs(narrow.positions - wide.positions))), 1e-6))

        # nodes
        excited = wp.stationary_state(grid, harmonic, 1)
        finer = wp.Grid(p.x_min, p.x_max, 2 * p.n_points, p.mass, p.hbar)
        excited_fine = wp.stationary_state(finer, wp.harmonic_potential(finer, p.omega, center), 1)
        node_mass, node_mass_fine = wp.node_window_mass(excited, center), wp.node_window_mass(excited_fine, center)
        node_ratio = node_mass / node_mass_fine
        result.checks.append(Check("node_mass_order", bool(6.0 <= node_ratio <= 10.0), node_ratio, 8.0, "~"))
        result.checks.append(check_at_most("positive_density_excluded_mass", wp.nodal_exclusion(ground, 0.0), 0.0))

        # two particles
        pair_grid = wp.Grid(p.x_min, p.x_max, p.two_particle_points, p.mass, p.hbar)
        pair_potential = wp.harmonic_potential(pair_grid, p.omega, center)
        pair = wp.symmetrized_two_particle_state(wp.stationary_state(pair_grid, pair_potential, 0),
                                                 wp.stationary_state(pair_grid, pair_potential, 1))
        marginal = wp.single_particle_marginal(pair)
        result.checks.append(check_at_most("marginal_particle_number", abs(marginal.sum() * pair_grid.dx - 2.0), 1e-8))

        result.tables["snapshot_initial.csv"] = wp.snapshot_csv_text(free)
        result.tables["snapshot_final.csv"] = wp.snapshot_csv_text(spread)
        result.tables["ehrenfest.csv"] = csv_table(["t", "x_mean", "x_newton"],
                                                   zip(narrow.times, narrow.positions, narrow.expected))
        result.tables["marginal.csv"] = csv_table(["x", "rho"], zip(pair_grid.x, marginal))
        result.summary = {
            'dx': grid.dx,
            'norm_drift': diagnostics['drift'],
            'continuity_ratio': ratio,
            'continuity_constant': constant,
            'node_window_mass': node_mass,
            'ehrenfest_deviation': narrow.max_deviation,
            'ground_energy': wp.stationary_energy(grid, harmonic, 0),
        }
        return result

    @staticmethod
    def _continuity_order(grid: wp.Grid, center: float, p: WavepacketParameters):
        """Residual ratio when dx and dt halve together, and C in residual <= C (dx^2 + dt^2)"""
        residuals = []
        for g, dt in ((grid, p.dt), (grid.refined(), p.dt / 2.0)):
            before = wp.gaussian_packet(g, center, p.sigma, p.k0)
            after = wp.propagate(before, dt, 1, p.scheme)
            residuals.append(wp.continuity_residual(before, after, dt))
        constant = residuals[0] / (grid.dx ** 2 + p.dt ** 2)
        return residuals[0] / residuals[1], constant

    @staticmethod
    def _rediagonalization_slope(ground: wp.GridState, u_pert: np.ndarray, first_order: float,
                                 lambdas: Sequence[float]) -> float:
        """log-log slope of |(E(lam) - E(0))/lam - <U>| against lam"""
        errors = [abs(wp.rediagonalized_energy_shift(ground, u_pert, lam) - first_order) for lam in lambdas]
        logs = np.log(np.abs(lambdas)), np.log(errors)
        return float(np.polyfit(logs[0], logs[1], 1)[0])


EXPERIMENTS: Dict[ExperimentId, Type[Experiment]] = {
    cls.experiment_id: cls
    for cls in (MeasureChainExperiment, RepeatedExperiment, FrequencyExperiment, ChebyshevExperiment,
                EstimatorExperiment, EnvarianceExperiment, WavepacketExperiment, DecoherenceExperiment)
}


def create_experiment(experiment_id: ExperimentId, params, rng: np.random.Generator,
                      tolerances: Tolerances = DEFAULT_TOLERANCES,
                      cap: int = DEFAULT_DIMENSION_CAP) -> Experiment:
    return EXPERIMENTS[ExperimentId(experiment_id)](params, rng, tolerances, cap)
