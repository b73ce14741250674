"""
everett_lab/config.py
Generated: 2026-10-17.1500
Purpose: Experiment configuration models and process settings

Provides:
- ExperimentConfig: one JSON document per run, validated up front
- One parameter model per experiment id, selected by the `experiment` field
- LabSettings: EVERETT_LAB_* environment (and .env) overrides
- load_config / parse_config: JSON -> ExperimentConfig, failures as ConfigError
- resolve_output_dir: flag > environment > config > ./results

Unknown keys are rejected at every level.
"""

import cmath
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Annotated

from .exceptions import ConfigError
from .hilbert_core import DEFAULT_DIMENSION_CAP, Tolerances

logger = logging.getLogger("everett_lab.config")

DEFAULT_OUTPUT_DIR = Path("results")
MAX_SEED = 2 ** 64 - 1


class ExperimentId(str, Enum):
    MEASURE_CHAIN = "measure_chain"
    REPEATED = "repeated"
    FREQUENCY = "frequency"
    CHEBYSHEV = "chebyshev"
    ESTIMATOR = "estimator"
    ENVARIANCE = "envariance"
    WAVEPACKET = "wavepacket"
    DECOHERENCE = "decoherence"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TolerancesConfig(StrictModel):
    equality: float = Field(1e-12, gt=0.0, lt=1e-3)
    unitarity: float = Field(1e-10, gt=0.0, lt=1e-3)
    reconstruction: float = Field(1e-10, gt=0.0, lt=1e-3)

    def to_tolerances(self) -> Tolerances:
        return Tolerances(self.equality, self.unitarity, self.reconstruction)


class AmplitudeParameters(StrictModel):
    """Magnitudes (or signed reals) plus optional phases in radians"""
    coefficients: List[float] = Field(default_factory=lambda: [0.3 ** 0.5, 0.7 ** 0.5], min_length=1, max_length=64)
    phases: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_amplitudes(self):
        if self.phases is not None and len(self.phases) != len(self.coefficients):
            raise ValueError("phases must match coefficients in length")
        if not any(c != 0.0 for c in self.coefficients):
            raise ValueError("coefficients must not all vanish")
        return self

    def amplitudes(self) -> List[complex]:
        phases = self.phases or [0.0] * len(self.coefficients)
        return [c * cmath.exp(1j * p) for c, p in zip(self.coefficients, phases)]


class MeasureChainParameters(AmplitudeParameters):
    experiment: Literal["measure_chain"] = "measure_chain"
    states_per_recorder: int = Field(1, ge=1, le=4)
    with_observer: bool = True
    env_qubits: int = Field(0, ge=0, le=16)
    coupling: float = Field(0.5, ge=0.0)
    time: float = Field(1.0, ge=0.0)
    random_states: int = Field(200, ge=0, le=5000)
    random_min_dim: int = Field(2, ge=2, le=16)
    random_max_dim: int = Field(6, ge=2, le=16)

    @model_validator(mode="after")
    def _check_dims(self):
        if self.random_min_dim > self.random_max_dim:
            raise ValueError("random_min_dim must not exceed random_max_dim")
        if len(self.coefficients) % self.states_per_recorder:
            raise ValueError("coefficient count must be a multiple of states_per_recorder")
        return self


class RepeatedParameters(AmplitudeParameters):
    experiment: Literal["repeated"] = "repeated"
    n_measurements: int = Field(3, ge=1, le=8)
    target: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_target(self):
        if self.target >= len(self.coefficients):
            raise ValueError("target must index one of the coefficients")
        return self


class FrequencyParameters(StrictModel):
    experiment: Literal["frequency"] = "frequency"
    N: int = Field(1000, ge=2, le=10 ** 7)
    rho_u: float = Field(0.3, gt=0.0, lt=1.0)
    delta_z: Optional[float] = Field(None, gt=0.0, lt=1.0)
    curve_points: int = Field(1001, ge=11, le=100001)
    explicit_max_n: int = Field(10, ge=1, le=10)
    random_amplitude_sets: int = Field(50, ge=0, le=500)
    peak_tolerance: float = Field(5e-3, gt=0.0)
    histogram_tolerance: float = Field(2e-2, gt=0.0)
    limit_n: List[Annotated[int, Field(ge=2, le=10 ** 7)]] = Field(
        default_factory=lambda: [1000, 10000, 100000], min_length=2)
    limit_rho_u: List[Annotated[float, Field(gt=0.0, lt=1.0)]] = Field(
        default_factory=lambda: [0.1, 0.3, 0.5], min_length=1)
    limit_min_ratio: float = Field(2.5, gt=1.0)

    @model_validator(mode="after")
    def _check_limit_ladder(self):
        if any(b <= a for a, b in zip(self.limit_n, self.limit_n[1:])):
            raise ValueError("limit_n must be strictly increasing")
        return self


class ChebyshevParameters(StrictModel):
    experiment: Literal["chebyshev"] = "chebyshev"
    N: int = Field(1000, ge=1, le=10 ** 7)
    rho_u: float = Field(0.3, gt=0.0, lt=1.0)
    delta_z: float = Field(0.1, gt=0.0, le=2.0)
    sweep: bool = False
    sweep_n: List[int] = Field(default_factory=lambda: [100, 300, 1000, 3000, 10000, 30000, 100000, 300000],
                               min_length=1)
    sweep_rho_u: List[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9], min_length=1)
    sweep_delta_z: List[float] = Field(default_factory=lambda: [0.02, 0.05, 0.1, 0.2, 0.4], min_length=1)

    @model_validator(mode="after")
    def _check_sweep(self):
        if any(n < 1 or n > 10 ** 7 for n in self.sweep_n):
            raise ValueError("sweep_n entries must lie in [1, 1e7]")
        if any(not 0.0 < r < 1.0 for r in self.sweep_rho_u):
            raise ValueError("sweep_rho_u entries must lie in (0, 1)")
        if any(not 0.0 < d < 1.0 for d in self.sweep_delta_z):
            raise ValueError("sweep_delta_z entries must lie in (0, 1)")
        return self


class EstimatorParameters(StrictModel):
    experiment: Literal["estimator"] = "estimator"
    N: int = Field(10000, ge=1, le=10 ** 6)
    rho_u: float = Field(0.3, gt=0.0, lt=1.0)
    window: float = Field(0.05, gt=0.0, lt=0.5)
    ladder: List[int] = Field(default_factory=lambda: [100, 1000, 10000], min_length=1)
    min_mass: float = Field(0.99, gt=0.0, le=1.0)
    grid_points: int = Field(2048, ge=64, le=65536)
    prior: Literal["uniform"] = "uniform"


class EnvarianceParameters(StrictModel):
    experiment: Literal["envariance"] = "envariance"
    c1: float = Field(0.5 ** 0.5, ge=0.0)
    c2: float = Field(0.5 ** 0.5, ge=0.0)
    phase1: float = 0.0
    phase2: float = 0.0
    env_dim: int = Field(2, ge=2, le=64)
    random_trials: int = Field(100, ge=0, le=10000)
    unequal_weight: float = Field(0.3, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check_norm(self):
        if self.c1 == 0.0 and self.c2 == 0.0:
            raise ValueError("c1 and c2 must not both vanish")
        return self


class WavepacketParameters(StrictModel):
    experiment: Literal["wavepacket"] = "wavepacket"
    x_min: float = -20.0
    x_max: float = 20.0
    n_points: int = Field(512, ge=16, le=4096)
    mass: float = Field(1.0, gt=0.0)
    hbar: float = Field(1.0, gt=0.0)
    dt: float = Field(0.01, gt=0.0)
    steps: int = Field(10000, ge=1, le=10 ** 6)
    sigma: float = Field(1.0, gt=0.0)
    k0: float = 1.0
    omega: float = Field(1.0, gt=0.0)
    force: float = 0.5
    t_max: float = Field(2.0, gt=0.0)
    lambdas: List[float] = Field(default_factory=lambda: [1e-3, 1e-4, 1e-5], min_length=2)
    two_particle_points: int = Field(128, ge=8, le=256)
    scheme: Literal["spectral", "crank_nicolson"] = "spectral"

    @model_validator(mode="after")
    def _check_box(self):
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_points % 2:
            raise ValueError("n_points must be even so a symmetric node falls between grid points")
        if any(lam == 0.0 for lam in self.lambdas):
            raise ValueError("lambdas must be nonzero")
        return self


class DecoherenceParameters(AmplitudeParameters):
    experiment: Literal["decoherence"] = "decoherence"
    env_qubits: List[int] = Field(default_factory=lambda: [2, 4, 8, 12], min_length=1)
    coupling: float = Field(0.5, gt=0.0)
    time: float = Field(1.0, gt=0.0)
    decohered_time: float = Field(3.0, gt=0.0)
    threshold: float = Field(1e-3, gt=0.0, lt=1.0)
    envelope_tolerance: float = Field(1e-8, gt=0.0)

    @model_validator(mode="after")
    def _check_qubits(self):
        if any(n < 1 or n > 16 for n in self.env_qubits):
            raise ValueError("env_qubits entries must lie in [1, 16]")
        return self


ParameterModel = Annotated[
    Union[
        MeasureChainParameters,
        RepeatedParameters,
        FrequencyParameters,
        ChebyshevParameters,
        EstimatorParameters,
        EnvarianceParameters,
        WavepacketParameters,
        DecoherenceParameters,
    ],
    Field(discriminator="experiment"),
]


class ExperimentConfig(StrictModel):
    """
    {"experiment": "<id>", "parameters": {...}, "seed": 0, "output_dir": "..."}

    The experiment id is copied into `parameters` before validation so the
    parameter model is chosen by the top-level field.
    """
    experiment: ExperimentId
    parameters: ParameterModel
    seed: int = Field(0, ge=0, le=MAX_SEED)
    output_dir: Optional[Path] = None
    tolerances: TolerancesConfig = Field(default_factory=TolerancesConfig)

    @model_validator(mode="before")
    @classmethod
    def _route_parameters(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            parameters = data.get("parameters", {})
            if isinstance(parameters, dict) and "experiment" in data:
                experiment = data["experiment"]
                if isinstance(experiment, Enum):
                    experiment = experiment.value
                if "experiment" in parameters and parameters["experiment"] != experiment:
                    raise ValueError("parameters.experiment disagrees with experiment")
                data["parameters"] = {**parameters, "experiment": experiment}
        return data

    def echo(self) -> Dict[str, Any]:
        """JSON-ready copy for reports; output_dir is left out so reports do not depend on it"""
        payload = self.model_dump(mode="json", exclude={"output_dir"})
        payload["parameters"].pop("experiment", None)
        return payload


class LabSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="EVERETT_LAB_", env_file=".env", extra="ignore")

    output_dir: Optional[Path] = None
    dimension_cap: int = Field(DEFAULT_DIMENSION_CAP, ge=1)
    log_level: str = "INFO"


def _error_key(error: Dict[str, Any]) -> str:
    loc = [str(part) for part in error.get("loc", ())]
    # drop the union tag pydantic inserts after "parameters"
    if len(loc) > 1 and loc[0] == "parameters" and loc[1] in {e.value for e in ExperimentId}:
        loc = [loc[0]] + loc[2:]
    return ".".join(loc) or "<root>"


def parse_config(data: Any) -> ExperimentConfig:
    """Validate a decoded JSON document; the first failure becomes a ConfigError"""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = _error_key(first)
        logger.debug(f"Config validation failed with {e.error_count()} errors; first at {key}")
        raise ConfigError(first.get("msg", "invalid value"), key=key) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})") from e
    return parse_config(data)


def resolve_output_dir(
    flag: Optional[Union[str, Path]],
    settings: Optional[LabSettings],
    config: Optional[ExperimentConfig],
) -> Path:
    """--output-dir > EVERETT_LAB_OUTPUT_DIR > config output_dir > ./results"""
    if flag:
        return Path(flag)
    if settings is not None and settings.output_dir:
        return Path(settings.output_dir)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return DEFAULT_OUTPUT_DIR
