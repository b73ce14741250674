#!/usr/bin/env python3
"""
everett_lab/experiment_runner.py
Generated: 2026-10-17.1630
Purpose: Run one validated experiment config end to end

Provides:
- RunContext: resolved output directory, dimension cap and seeded generator
- RunReport: config echo, per-check verdicts, output manifest, wall time
- ExperimentRunner.run: execute, write tables and report.json atomically
- emit_figure_table: the frequency curve table on its own

report.json holds everything except the wall time, so identical
(config, seed) pairs give byte-identical output directories.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .config import ExperimentConfig, ExperimentId, LabSettings, resolve_output_dir
from .exceptions import ConfigError, EverettLabError
from .experiments import FIGURE_POINTS, create_experiment, figure_table_text
from .output_manager import OutputManager

logger = logging.getLogger("everett_lab.experiment_runner")

REPORT_NAME = "report.json"
FIGURE_NAME = "figure.csv"


@dataclass
class RunContext:
    config: ExperimentConfig
    output_dir: Path
    dimension_cap: int

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)


@dataclass
class RunReport:
    """Outcome of one run; status is 'pass', 'fail' or 'error'"""
    experiment: str
    config: Dict[str, Any]
    status: str
    checks: List[Dict[str, Any]] = field(default_factory=list)
    manifest: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None
    wall_time: float = 0.0
    exit_code: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_payload(self) -> Dict[str, Any]:
        return _jsonable({
            'experiment': self.experiment,
            'config': self.config,
            'status': self.status,
            'checks': self.checks,
            'manifest': self.manifest,
            'summary': self.summary,
            'error': self.error,
        })


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ExperimentRunner:
    """
    Resolves settings, runs the experiment and writes its outputs.

    Library errors are caught here and turned into an 'error' report carrying
    the error's exit code; nothing escapes except ConfigError.
    """

    def __init__(self, settings: Optional[LabSettings] = None):
        self.settings = settings or LabSettings()

    def context_for(self, config: ExperimentConfig, output_dir: Optional[Path] = None) -> RunContext:
        resolved = resolve_output_dir(output_dir, self.settings, config)
        return RunContext(config, resolved, self.settings.dimension_cap)

    def run(self, config: ExperimentConfig, output_dir: Optional[Path] = None) -> RunReport:
        context = self.context_for(config, output_dir)
        outputs = OutputManager(context.output_dir)
        report = RunReport(config.experiment.value, config.echo(), status="error")
        logger.info(f"Starting experiment {config.experiment.value} (seed {config.seed}) -> {context.output_dir}")

        started = time.perf_counter()
        try:
            experiment = create_experiment(config.experiment, config.parameters, context.rng,
                                           config.tolerances.to_tolerances(), context.dimension_cap)
            result = experiment.run()
            for name in sorted(result.tables):
                outputs.write_text(name, result.tables[name])
            report.checks = [c.to_dict() for c in result.checks]
            report.summary = result.summary
            report.status = "pass" if result.passed else "fail"
            report.exit_code = 0 if result.passed else 1
        except ConfigError:
            raise
        except EverettLabError as e:
            logger.error(f"Experiment {config.experiment.value} failed: {e}")
            report.error = {'type': type(e).__name__, 'message': str(e)}
            if getattr(e, "diagnostics", None):
                report.error['diagnostics'] = e.diagnostics
            report.exit_code = e.exit_code
        report.wall_time = time.perf_counter() - started

        report.manifest = outputs.manifest
        outputs.write_json(REPORT_NAME, report.to_payload())
        verification = outputs.verify_outputs()
        if verification['status'] != 'success':
            # report.json is outside the manifest, so it can be rewritten with the error
            report.status = "error"
            report.error = {'type': 'OutputVerificationError',
                            'message': f"written outputs failed digest verification in {context.output_dir}",
                            'diagnostics': {'missing': verification['missing'],
                                            'mismatched': verification['mismatched']}}
            report.exit_code = EverettLabError.exit_code
            outputs.write_json(REPORT_NAME, report.to_payload())
        failed = [c['name'] for c in report.checks if not c['passed']]
        logger.info(f"Finished {config.experiment.value}: {report.status} in {report.wall_time:.2f}s"
                    + (f" (failed: {', '.join(failed)})" if failed else ""))
        return report

    def emit_figure_table(self, config: ExperimentConfig, output_dir: Optional[Path] = None) -> Path:
        """Write figure.csv (z, rho(z|u), exact histogram, observer estimate) for a frequency config"""
        if config.experiment is not ExperimentId.FREQUENCY:
            raise ConfigError("figure tables need experiment=frequency", key="experiment")
        context = self.context_for(config, output_dir)
        outputs = OutputManager(context.output_dir)
        params = config.parameters
        entry = outputs.write_text(FIGURE_NAME, figure_table_text(params.N, params.rho_u, FIGURE_POINTS))
        return context.output_dir / entry['path']


def run(config: ExperimentConfig, output_dir: Optional[Path] = None,
        settings: Optional[LabSettings] = None) -> RunReport:
    return ExperimentRunner(settings).run(config, output_dir)


def emit_figure_table(config: ExperimentConfig, output_dir: Optional[Path] = None,
                      settings: Optional[LabSettings] = None) -> Path:
    return ExperimentRunner(settings).emit_figure_table(config, output_dir)
