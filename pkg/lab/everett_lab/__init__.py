# everett_lab/__init__.py
# Generated: 2026-10-17.0900
# Purpose: everett-lab package initialization
# Numerical laboratory for branch structure, frequency statistics and wavepackets

"""
everett-lab - Numerical checks for unitary-only quantum mechanics

Builds finite-dimensional measurement chains, extracts branch weights,
computes relative-frequency distributions over repeated trials and
propagates grid wavepackets, each checked against closed forms.

Usage:
    everett-lab run configs/frequency.json --output-dir results/frequency
    python -m everett_lab validate configs/wavepacket.json
"""

__version__ = "0.1.0"
__author__ = "everett-lab contributors"
__license__ = "MIT"

from .exceptions import CapacityError, ConfigError, ContractError, EverettLabError, PropagationError
from .config import ExperimentConfig, ExperimentId, LabSettings, load_config, parse_config
from .experiment_runner import ExperimentRunner, RunReport, emit_figure_table, run

__all__ = [
    'CapacityError',
    'ConfigError',
    'ContractError',
    'EverettLabError',
    'PropagationError',
    'ExperimentConfig',
    'ExperimentId',
    'LabSettings',
    'load_config',
    'parse_config',
    'ExperimentRunner',
    'RunReport',
    'emit_figure_table',
    'run',
]
