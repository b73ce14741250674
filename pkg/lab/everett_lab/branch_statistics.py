"""
everett_lab/branch_statistics.py
Generated: 2026-10-17.1105
Purpose: Exact and asymptotic branch-weight distributions for repeated measurements

Provides:
- exact_count_density: rho(m:N|u), binomial terms in log space
- gaussian_count_density / relative_frequency_density: the large-N Gaussian forms
- coarse_histogram: intervals I_k around rho_u, bar graph rho~(k) and histogram views
- chebyshev_bound_check: tail mass against 4 rho_u rho_nu / (dz^2 N)
- frequency_operator_density / hartle_variance: F_N on the N-fold product basis,
  explicit tensor path and combinatorial path
- estimator_distribution: branch-weighted mixture of uniform-prior posteriors for P_u
- CSV serialization of distributions

Interval convention: I_k = [z_k - dz/2, z_k + dz/2) clipped to [0, 1], the last
interval closed at 1 so z = 1 is covered.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from .exceptions import ContractError
from .hilbert_core import DEFAULT_DIMENSION_CAP, check_capacity
from .output_manager import atomic_write_text

logger = logging.getLogger("everett_lab.branch_statistics")

MAX_TRIALS = 10 ** 7
MAX_EXPLICIT_TRIALS = 20
GAUSSIAN_GUARD = 9.0
ESTIMATOR_GRID_POINTS = 2048
# snaps float noise at interval edges onto the exact edge
EDGE_SNAP = 1e-9


class DistributionKind(str, Enum):
    EXACT_COUNT = "exact_count"
    GAUSSIAN_COUNT = "gaussian_count"
    GAUSSIAN_FREQUENCY = "gaussian_frequency"
    HISTOGRAM = "histogram"
    BAR_GRAPH = "bar_graph"
    ESTIMATOR = "estimator"


class Prior(str, Enum):
    UNIFORM = "uniform"


DISCRETE_KINDS = (DistributionKind.EXACT_COUNT, DistributionKind.GAUSSIAN_COUNT, DistributionKind.BAR_GRAPH)


def ordered_sum(values: Iterable[float]) -> float:
    """Sum in descending-magnitude order with exact rounding"""
    values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
    order = np.argsort(-np.abs(values), kind="stable")
    return math.fsum(values[order].tolist())


@dataclass(frozen=True, eq=False)
class FrequencyDistribution:
    """
    Density over counts m, relative frequency z, interval midpoints z_k or the
    estimated probability P_u. `widths` holds cell widths for histogram and
    estimator kinds.
    """
    kind: DistributionKind
    support: np.ndarray
    density: np.ndarray
    n_trials: int
    rho_u: float
    delta_z: Optional[float] = None
    widths: Optional[np.ndarray] = None
    validity_warning: bool = False

    def total_mass(self) -> float:
        if self.kind in DISCRETE_KINDS:
            return ordered_sum(self.density)
        if self.widths is not None:
            return ordered_sum(self.density * self.widths)
        return float(integrate.trapezoid(self.density, self.support))

    def mean(self) -> float:
        if self.kind in DISCRETE_KINDS:
            return ordered_sum(self.support * self.density)
        if self.widths is not None:
            return ordered_sum(self.support * self.density * self.widths)
        return float(integrate.trapezoid(self.support * self.density, self.support))

    def mass_within(self, low: float, high: float) -> float:
        """Mass of support points (cell midpoints) in [low, high]"""
        mask = (self.support >= low) & (self.support <= high)
        if self.kind in DISCRETE_KINDS:
            return ordered_sum(self.density[mask])
        if self.widths is None:
            raise ContractError("mass_within needs a discrete or cell-based distribution")
        return ordered_sum(self.density[mask] * self.widths[mask])

    @property
    def peak_support(self) -> float:
        return float(self.support[int(np.argmax(self.density))])

    def to_csv_text(self) -> str:
        """Header (kind, N, rho_u, delta_z), then (support_value, density) rows, 17 significant digits"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["kind", "N", "rho_u", "delta_z"])
        writer.writerow([self.kind.value, self.n_trials, _fmt(self.rho_u),
                         "" if self.delta_z is None else _fmt(self.delta_z)])
        writer.writerow(["support_value", "density"])
        for z, d in zip(self.support, self.density):
            writer.writerow([_fmt(z), _fmt(d)])
        return buffer.getvalue()

    @classmethod
    def from_csv_text(cls, text: str) -> "FrequencyDistribution":
        rows = list(csv.reader(io.StringIO(text)))
        if len(rows) < 3 or rows[0] != ["kind", "N", "rho_u", "delta_z"] or rows[2] != ["support_value", "density"]:
            raise ContractError("not a distribution CSV: header rows missing")
        kind, n_trials, rho_u, delta_z = rows[1]
        data = np.array([[float(a), float(b)] for a, b in rows[3:]]).reshape(-1, 2)
        return cls(DistributionKind(kind), data[:, 0], data[:, 1], int(n_trials), float(rho_u),
                   float(delta_z) if delta_z else None)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _require_probability(rho_u: float) -> None:
    if not 0.0 < rho_u < 1.0:
        raise ContractError(f"rho_u must lie in (0, 1), got {rho_u}")


def _require_trials(n_trials: int) -> None:
    if n_trials < 1 or n_trials > MAX_TRIALS:
        raise ContractError(f"N must lie in [1, {MAX_TRIALS}], got {n_trials}")


def _binomial_pmf(n_trials: int, rho_u: float) -> np.ndarray:
    """rho(m:N|u) for m = 0..N; rho_u may sit on the endpoints (certain outcome)"""
    m = np.arange(n_trials + 1)
    if rho_u <= 0.0 or rho_u >= 1.0:
        density = np.zeros(n_trials + 1)
        density[n_trials if rho_u >= 1.0 else 0] = 1.0
        return density
    log_choose = -special.betaln(1 + n_trials - m, 1 + m) - np.log(n_trials + 1)
    log_pmf = log_choose + m * np.log(rho_u) + (n_trials - m) * np.log1p(-rho_u)
    density = np.exp(log_pmf)
    total = ordered_sum(density)
    if abs(total - 1.0) > 1e-12:
        logger.debug(f"Binomial N={n_trials} rho_u={rho_u}: normalization defect {total - 1.0:.2e} removed")
    return density / total


# =============================================================================
# COUNT AND FREQUENCY DENSITIES
# =============================================================================

def exact_count_density(n_trials: int, rho_u: float) -> FrequencyDistribution:
    """Summed weight of the branches in which u appears precisely m times out of N"""
    _require_trials(n_trials)
    _require_probability(rho_u)
    m = np.arange(n_trials + 1, dtype=float)
    return FrequencyDistribution(DistributionKind.EXACT_COUNT, m, _binomial_pmf(n_trials, rho_u), n_trials, rho_u)


def _reuse_exact(exact: Optional[FrequencyDistribution], n_trials: int, rho_u: float) -> FrequencyDistribution:
    """Precomputed exact density for sweeps; recomputed when absent"""
    if exact is None:
        return exact_count_density(n_trials, rho_u)
    if exact.kind is not DistributionKind.EXACT_COUNT or exact.n_trials != n_trials or exact.rho_u != rho_u:
        raise ContractError("precomputed density does not match (N, rho_u)")
    return exact


def _guard(n_trials: int, rho_u: float, what: str) -> bool:
    spread = n_trials * rho_u * (1.0 - rho_u)
    if spread < GAUSSIAN_GUARD:
        logger.warning(f"{what}: N rho_u rho_nu = {spread:.3g} < {GAUSSIAN_GUARD}; Gaussian form unreliable")
        return True
    return False


def gaussian_count_density(n_trials: int, rho_u: float) -> FrequencyDistribution:
    """(2 pi N rho_u rho_nu)^(-1/2) exp(-(m - N rho_u)^2 / (2 N rho_u rho_nu)) on m = 0..N"""
    _require_trials(n_trials)
    _require_probability(rho_u)
    warning = _guard(n_trials, rho_u, "gaussian_count_density")
    m = np.arange(n_trials + 1, dtype=float)
    variance = n_trials * rho_u * (1.0 - rho_u)
    density = np.exp(-(m - n_trials * rho_u) ** 2 / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)
    return FrequencyDistribution(DistributionKind.GAUSSIAN_COUNT, m, density, n_trials, rho_u,
                                 validity_warning=warning)


def gaussian_limit_error(n_trials: int, rho_u: float, exact: Optional[FrequencyDistribution] = None) -> float:
    """max over m of |rho(m:N|u) - Gaussian(m)|; falls off like 1/N"""
    exact = _reuse_exact(exact, n_trials, rho_u)
    gaussian = gaussian_count_density(n_trials, rho_u)
    return float(np.max(np.abs(exact.density - gaussian.density)))


def relative_frequency_value(z, n_trials: int, rho_u: float):
    """rho(z|u): Gaussian in z with mean rho_u and variance rho_u rho_nu / N"""
    variance = rho_u * (1.0 - rho_u) / n_trials
    return np.exp(-(np.asarray(z) - rho_u) ** 2 / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)


def relative_frequency_density(n_trials: int, rho_u: float, points: int = 1001) -> FrequencyDistribution:
    """rho(z|u) sampled on an evenly spaced z grid over [0, 1]"""
    _require_trials(n_trials)
    _require_probability(rho_u)
    warning = _guard(n_trials, rho_u, "relative_frequency_density")
    z = np.linspace(0.0, 1.0, points)
    return FrequencyDistribution(DistributionKind.GAUSSIAN_FREQUENCY, z, relative_frequency_value(z, n_trials, rho_u),
                                 n_trials, rho_u, validity_warning=warning)


def observer_estimate_density(n_trials: int, z_observed: float, p_values) -> np.ndarray:
    """
    P(z|u) read as a function of the assumed single-trial probability P_u:
    where an observer who saw frequency z would place P_u.
    """
    p = np.asarray(p_values, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ContractError("P_u values must lie in (0, 1)")
    variance = p * (1.0 - p) / n_trials
    return np.exp(-(z_observed - p) ** 2 / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)


# =============================================================================
# COARSE GRAINING
# =============================================================================

def _snap(value: float) -> float:
    nearest = round(value)
    return float(nearest) if abs(value - nearest) < EDGE_SNAP else value


@dataclass(frozen=True)
class HistogramSpec:
    """Intervals I_k with midpoints z_k = rho_u + k dz; k_range is the minimal cover of [0, 1]"""
    rho_u: float
    delta_z: float
    k_range: Tuple[int, ...]

    @classmethod
    def build(cls, rho_u: float, delta_z: float) -> "HistogramSpec":
        if delta_z <= 0.0:
            raise ContractError(f"delta_z must be positive, got {delta_z}")
        k_min = math.floor(_snap(-rho_u / delta_z + 0.5))
        k_max = math.ceil(_snap((1.0 - rho_u) / delta_z - 0.5))
        return cls(rho_u, delta_z, tuple(range(k_min, k_max + 1)))

    @property
    def centers(self) -> np.ndarray:
        return self.rho_u + np.array(self.k_range, dtype=float) * self.delta_z

    @property
    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """Clipped (low, high) of every interval"""
        low = np.clip(self.centers - self.delta_z / 2.0, 0.0, 1.0)
        high = np.clip(self.centers + self.delta_z / 2.0, 0.0, 1.0)
        return low, high

    @property
    def widths(self) -> np.ndarray:
        low, high = self.edges
        return high - low

    def interval_of_count(self, m, n_trials: int) -> np.ndarray:
        """k of the interval containing z = m / N (vectorized)"""
        t = (np.asarray(m, dtype=float) - n_trials * self.rho_u) / (n_trials * self.delta_z) + 0.5
        nearest = np.round(t)
        t = np.where(np.abs(t - nearest) < EDGE_SNAP, nearest, t)
        return np.clip(np.floor(t).astype(int), self.k_range[0], self.k_range[-1])

    def center_of(self, k: int) -> float:
        return self.rho_u + k * self.delta_z

    def position(self, k) -> np.ndarray:
        return np.asarray(k) - self.k_range[0]


@dataclass(frozen=True)
class CoarseHistogram:
    spec: HistogramSpec
    bar_graph: FrequencyDistribution
    histogram: FrequencyDistribution

    @property
    def central_mass(self) -> float:
        """rho~(0), the mass of the interval centred on rho_u"""
        return float(self.bar_graph.density[int(self.spec.position(0))])


def _coarse_masses(density: np.ndarray, n_trials: int, spec: HistogramSpec) -> np.ndarray:
    positions = spec.position(spec.interval_of_count(np.arange(n_trials + 1), n_trials))
    masses = np.zeros(len(spec.k_range))
    # positions are non-decreasing in m, so each interval is one contiguous run of counts
    starts = np.concatenate(([0], np.flatnonzero(np.diff(positions)) + 1))
    ends = np.append(starts[1:], positions.size)
    for start, end in zip(starts, ends):
        masses[positions[start]] = ordered_sum(density[start:end])
    return masses


def coarse_histogram(n_trials: int, rho_u: float, delta_z: float,
                     exact: Optional[FrequencyDistribution] = None) -> CoarseHistogram:
    """
    rho~(k) = sum of rho(m:N|u) with m/N in I_k, returned as a bar graph at z_k
    and as a piecewise-constant histogram rho~(k) / |I_k| on the clipped intervals.
    """
    if not 0.0 < delta_z < 1.0:
        raise ContractError(f"delta_z must lie in (0, 1), got {delta_z}")
    exact = _reuse_exact(exact, n_trials, rho_u)
    spec = HistogramSpec.build(rho_u, delta_z)
    masses = _coarse_masses(exact.density, n_trials, spec)
    widths = spec.widths
    bar_graph = FrequencyDistribution(DistributionKind.BAR_GRAPH, spec.centers, masses, n_trials, rho_u, delta_z)
    histogram = FrequencyDistribution(DistributionKind.HISTOGRAM, spec.centers, masses / widths, n_trials, rho_u,
                                      delta_z, widths=widths)
    return CoarseHistogram(spec, bar_graph, histogram)


def histogram_gaussian_distance(coarse: CoarseHistogram) -> Dict[str, float]:
    """
    Sup distance between the exact histogram and rho(z|u) averaged over the
    same intervals, absolute and relative to the Gaussian peak height.
    """
    n_trials, rho_u = coarse.histogram.n_trials, coarse.histogram.rho_u
    sigma = math.sqrt(rho_u * (1.0 - rho_u) / n_trials)
    low, high = coarse.spec.edges
    gaussian_mass = stats.norm.cdf(high, rho_u, sigma) - stats.norm.cdf(low, rho_u, sigma)
    gaussian_avg = gaussian_mass / coarse.spec.widths
    distance = float(np.max(np.abs(coarse.histogram.density - gaussian_avg)))
    peak = float(relative_frequency_value(rho_u, n_trials, rho_u))
    return {'sup_distance': distance, 'peak_height': peak, 'relative_distance': distance / peak}


def coarse_eigen_residual(n_trials: int, rho_u: float, delta_z: float) -> float:
    """||(F_{N dz} - z_0)|psi>^N||^2 = sum_k rho~(k) (z_k - z_0)^2"""
    coarse = coarse_histogram(n_trials, rho_u, delta_z)
    offsets = coarse.spec.centers - rho_u
    return ordered_sum(coarse.bar_graph.density * offsets ** 2)


# =============================================================================
# CONCENTRATION
# =============================================================================

@dataclass(frozen=True)
class ChebyshevReport:
    n_trials: int
    rho_u: float
    delta_z: float
    tail_mass: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.tail_mass <= self.bound


def chebyshev_bound_check(n_trials: int, rho_u: float, delta_z: float,
                          exact: Optional[FrequencyDistribution] = None) -> ChebyshevReport:
    """Tail mass with |m/N - rho_u| > dz/2 against 4 rho_u rho_nu / (dz^2 N)"""
    if delta_z <= 0.0:
        raise ContractError(f"delta_z must be positive, got {delta_z}")
    exact = _reuse_exact(exact, n_trials, rho_u)
    outside = np.abs(exact.support - n_trials * rho_u) > n_trials * delta_z / 2.0
    tail = ordered_sum(exact.density[outside])
    bound = 4.0 * rho_u * (1.0 - rho_u) / (delta_z ** 2 * n_trials)
    return ChebyshevReport(n_trials, rho_u, delta_z, tail, bound)


# =============================================================================
# FREQUENCY OPERATOR
# =============================================================================

@dataclass(frozen=True)
class FrequencyOperatorSpec:
    """F_N counting outcome `target` over N trials; with `coarse` set it is F_{N dz}"""
    n_trials: int
    target: int
    coarse: Optional[HistogramSpec] = None

    def __post_init__(self):
        _require_trials(self.n_trials)
        if self.target < 0:
            raise ContractError(f"target must be a non-negative outcome index, got {self.target}")

    def eigenvalues(self) -> np.ndarray:
        """Spectrum of F_N (m / N for m = 0..N) or the interval midpoints z_k of F_{N dz}"""
        if self.coarse is None:
            return np.arange(self.n_trials + 1) / self.n_trials
        return self.coarse.centers

    def eigenvalue_of_count(self, m) -> np.ndarray:
        """Eigenvalue on a product basis state whose labels hit the target m times (vectorized)"""
        m = np.asarray(m)
        if self.coarse is None:
            return m / self.n_trials
        return self.coarse.centers[self.coarse.position(self.coarse.interval_of_count(m, self.n_trials))]

    def eigenvalue_density(self, count_density: np.ndarray) -> np.ndarray:
        """Weights per eigenvalue, given the weight of each count m = 0..N"""
        if self.coarse is None:
            return np.asarray(count_density, dtype=float)
        return _coarse_masses(count_density, self.n_trials, self.coarse)


def _probabilities(psi_amplitudes: Sequence[complex]) -> np.ndarray:
    amplitudes = np.asarray(psi_amplitudes, dtype=complex).ravel()
    probabilities = np.abs(amplitudes) ** 2
    if abs(probabilities.sum() - 1.0) > 1e-10:
        raise ContractError(f"single-system amplitudes must be normalized (sum |c|^2 = {probabilities.sum():.12f})")
    return probabilities


def _require_outcome(u_index: int, size: int) -> None:
    if not 0 <= u_index < size:
        raise ContractError(f"u_index {u_index} out of range for {size} amplitudes")


def _explicit_counts(psi_amplitudes: Sequence[complex], n_trials: int, target: int,
                     cap: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Target counts of every basis state of the N-fold product and the squared
    amplitudes of |psi>^N on them (F_N is diagonal there with eigenvalue count/N).
    """
    amplitudes = np.asarray(psi_amplitudes, dtype=complex).ravel()
    d = amplitudes.size
    _require_trials(n_trials)
    _require_outcome(target, d)
    if n_trials > MAX_EXPLICIT_TRIALS:
        raise ContractError(f"explicit path supports N <= {MAX_EXPLICIT_TRIALS}, got {n_trials}")
    check_capacity(d ** n_trials, cap, what="explicit frequency-operator basis")
    is_target = (np.arange(d) == target).astype(int)
    counts = reduce(lambda acc, _: (acc[:, None] + is_target[None, :]).ravel(), range(n_trials), np.zeros(1, dtype=int))
    product_state = reduce(np.kron, [amplitudes] * n_trials)
    return counts, np.abs(product_state) ** 2


def coarse_frequency_eigenvalue(labels: Sequence[int], target: int, spec: HistogramSpec) -> float:
    """F_{N dz} on one product basis state |b_1>...|b_N>: the z_k of the interval holding its frequency"""
    labels = np.asarray(labels)
    operator = FrequencyOperatorSpec(labels.size, target, spec)
    return float(operator.eigenvalue_of_count(int(np.sum(labels == target))))


def frequency_operator_density(
    psi_amplitudes: Sequence[complex],
    n_trials: int,
    u_index: int,
    coarse: Optional[float] = None,
    method: str = "combinatorial",
    cap: int = DEFAULT_DIMENSION_CAP,
) -> FrequencyDistribution:
    """
    Eigenvalue density of F_N (or of F_{N dz} when `coarse` gives dz) for |psi>^N.

    method="explicit" builds the diagonal of F_N on the N-fold product basis and
    sums squared amplitudes per eigenvalue; method="combinatorial" uses the
    binomial with rho_u = |c_u|^2. Both give the same density.
    """
    probabilities = _probabilities(psi_amplitudes)
    _require_outcome(u_index, probabilities.size)
    rho_u = float(probabilities[u_index])
    operator = FrequencyOperatorSpec(n_trials, u_index,
                                     None if coarse is None else HistogramSpec.build(rho_u, coarse))

    if method == "explicit":
        counts, weights = _explicit_counts(psi_amplitudes, n_trials, u_index, cap)
        density = np.bincount(counts, weights=weights, minlength=n_trials + 1)
    elif method == "combinatorial":
        density = _binomial_pmf(n_trials, rho_u)
    else:
        raise ContractError(f"unknown method {method!r}")

    kind = DistributionKind.EXACT_COUNT if coarse is None else DistributionKind.BAR_GRAPH
    return FrequencyDistribution(kind, operator.eigenvalues(), operator.eigenvalue_density(density),
                                 n_trials, rho_u, coarse)


def hartle_variance(
    psi_amplitudes: Sequence[complex],
    n_trials: int,
    u_index: int,
    method: str = "combinatorial",
    cap: int = DEFAULT_DIMENSION_CAP,
) -> float:
    """(Delta_N F_N)^2 = <psi|^N (F_N - rho_u)^2 |psi>^N = rho_u rho_nu / N"""
    probabilities = _probabilities(psi_amplitudes)
    _require_trials(n_trials)
    _require_outcome(u_index, probabilities.size)
    rho_u = float(probabilities[u_index])
    if method == "combinatorial":
        return rho_u * (1.0 - rho_u) / n_trials
    if method == "explicit":
        counts, weights = _explicit_counts(psi_amplitudes, n_trials, u_index, cap)
        eigenvalues = FrequencyOperatorSpec(n_trials, u_index).eigenvalue_of_count(counts)
        return ordered_sum(weights * (eigenvalues - rho_u) ** 2)
    raise ContractError(f"unknown method {method!r}")


def hartle_residual_norm(psi_amplitudes: Sequence[complex], n_trials: int, u_index: int,
                         method: str = "combinatorial") -> float:
    """||(F_N - rho_u)|psi>^N||, shrinking like N^(-1/2)"""
    return math.sqrt(hartle_variance(psi_amplitudes, n_trials, u_index, method))


# =============================================================================
# BORN ESTIMATOR
# =============================================================================

def estimator_distribution(
    n_trials: int,
    rho_u: float,
    prior: Prior = Prior.UNIFORM,
    grid_points: int = ESTIMATOR_GRID_POINTS,
    weight_cutoff: float = 1e-18,
) -> FrequencyDistribution:
    """
    Density of the observer's estimate of P_u over branches: each branch with m
    successes (weight rho(m:N|u)) contributes its posterior Beta(m+1, N-m+1);
    the mixture is sampled at the midpoints of `grid_points` equal cells.

    Branch counts whose weight falls below weight_cutoff * max weight are dropped.
    """
    if Prior(prior) is not Prior.UNIFORM:
        raise ContractError(f"only the uniform prior is supported, got {prior}")
    exact = exact_count_density(n_trials, rho_u)
    width = 1.0 / grid_points
    p = (np.arange(grid_points) + 0.5) * width

    keep = np.nonzero(exact.density >= weight_cutoff * exact.density.max())[0]
    mixture = np.zeros(grid_points)
    for chunk in np.array_split(keep, max(1, keep.size // 256)):
        m = chunk[:, None].astype(float)
        log_posterior = stats.beta.logpdf(p[None, :], m + 1.0, n_trials - m + 1.0)
        mixture += exact.density[chunk] @ np.exp(log_posterior)
    mixture /= ordered_sum(mixture * width)
    return FrequencyDistribution(DistributionKind.ESTIMATOR, p, mixture, n_trials, rho_u,
                                 widths=np.full(grid_points, width))


# =============================================================================
# SERIALIZATION
# =============================================================================

def write_distribution_csv(distribution: FrequencyDistribution, path) -> Dict[str, object]:
    return atomic_write_text(path, distribution.to_csv_text())


def read_distribution_csv(path) -> FrequencyDistribution:
    with open(path, "r", encoding="utf-8") as handle:
        return FrequencyDistribution.from_csv_text(handle.read())
