#!/usr/bin/env python3
"""
everett_lab/main.py
Generated: 2026-10-17.1700
Purpose: Command-line surface for the everett-lab experiments

Commands:
- run <config.json>       run one experiment, write tables and report.json
- validate <config.json>  parse and validate only
- figure <config.json>    write figure.csv for a frequency config
- batch <config.json>...  run several configs in worker processes

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or config
error, 3 capacity exceeded.
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import click

from .config import LabSettings, load_config
from .exceptions import ConfigError, EverettLabError
from .experiment_runner import ExperimentRunner

logger = logging.getLogger("everett_lab.main")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

EXIT_OK = 0


def configure_logging(verbose: bool = False, log_file: Optional[str] = None,
                      settings: Optional[LabSettings] = None):
    level_name = "DEBUG" if verbose else (settings.log_level if settings else "INFO")
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level_name.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
    )


def _load_settings() -> LabSettings:
    try:
        return LabSettings()
    except Exception as e:
        raise ConfigError(f"invalid EVERETT_LAB_* environment: {e}") from e


def _fail(error: EverettLabError) -> None:
    click.echo(f"error: {error}", err=True)
    sys.exit(error.exit_code)


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG level")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None,
              help="Also write the log to this file")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, log_file: Optional[str]):
    """Numerical checks of branch structure, frequency statistics and wavepackets."""
    try:
        settings = _load_settings()
    except ConfigError as e:
        configure_logging(verbose, log_file)
        _fail(e)
    configure_logging(verbose, log_file, settings)
    ctx.obj = settings


@cli.command("run")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
              help="Override the seed from the config")
@click.pass_obj
def run_command(settings: LabSettings, config_path: str, output_dir: Optional[str], seed: Optional[int]):
    """Run one experiment config."""
    try:
        config = load_config(config_path)
        if seed is not None:
            config = config.model_copy(update={"seed": seed})
        report = ExperimentRunner(settings).run(config, Path(output_dir) if output_dir else None)
    except EverettLabError as e:
        _fail(e)

    for check in report.checks:
        mark = "PASS" if check['passed'] else "FAIL"
        click.echo(f"{mark} {check['name']}: {check['value']!r} {check['relation']} {check['threshold']!r}")
    if report.error:
        click.echo(f"error: {report.error['type']}: {report.error['message']}", err=True)
    click.echo(f"{report.experiment}: {report.status}")
    sys.exit(report.exit_code)


@cli.command("validate")
@click.argument("config_path", type=click.Path(dir_okay=False))
def validate_command(config_path: str):
    """Validate a config without running it."""
    try:
        config = load_config(config_path)
    except ConfigError as e:
        _fail(e)
    click.echo(f"{config_path}: valid {config.experiment.value} config (seed {config.seed})")


@cli.command("figure")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.pass_obj
def figure_command(settings: LabSettings, config_path: str, output_dir: Optional[str]):
    """Write figure.csv for a frequency config."""
    try:
        config = load_config(config_path)
        path = ExperimentRunner(settings).emit_figure_table(config, Path(output_dir) if output_dir else None)
    except EverettLabError as e:
        _fail(e)
    click.echo(str(path))


def _batch_item(config_path: str, output_dir: str) -> Tuple[str, int, str]:
    # runs in a worker process; only plain values cross the boundary
    try:
        config = load_config(config_path)
        report = ExperimentRunner().run(config, Path(output_dir))
        return config_path, report.exit_code, report.status
    except EverettLabError as e:
        return config_path, e.exit_code, f"error: {e}"


def batch_output_dirs(config_paths: List[str], base: Path) -> List[Path]:
    """One subdirectory per config, named after the file stem; repeats get a numeric suffix"""
    seen = {}
    dirs = []
    for config_path in config_paths:
        stem = Path(config_path).stem
        count = seen.get(stem, 0)
        seen[stem] = count + 1
        dirs.append(base / (stem if count == 0 else f"{stem}-{count}"))
    return dirs


@cli.command("batch")
@click.argument("config_paths", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=click.IntRange(1, 64), default=1)
@click.pass_obj
def batch_command(settings: LabSettings, config_paths: Tuple[str, ...], output_dir: Optional[str], workers: int):
    """Run several configs; the exit code is the worst of the individual ones."""
    base = Path(output_dir) if output_dir else (settings.output_dir or Path("results"))
    dirs = batch_output_dirs(list(config_paths), Path(base))

    if workers == 1:
        outcomes = [_batch_item(p, str(d)) for p, d in zip(config_paths, dirs)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_batch_item, config_paths, [str(d) for d in dirs]))

    worst = EXIT_OK
    for (config_path, code, status), directory in zip(outcomes, dirs):
        click.echo(f"{config_path}: {status} -> {directory}")
        worst = max(worst, code)
    logger.info(f"Batch of {len(outcomes)} configs finished with exit code {worst}")
    sys.exit(worst)


def main():
    cli(prog_name="everett-lab")


if __name__ == "__main__":
    main()
