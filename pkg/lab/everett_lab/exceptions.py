"""
everett_lab/exceptions.py
Generated: 2026-10-17.0910
Purpose: Error hierarchy for everett-lab with CLI exit-code mapping

Every library error also derives from the built-in exception a caller would
expect in that spot, so `except ValueError` keeps working for contract errors.
"""

from typing import Any, Dict, Optional


class EverettLabError(Exception):
    """Base class for all everett-lab errors"""

    exit_code = 1


class ContractError(EverettLabError, ValueError):
    """A precondition of an operation does not hold"""


class CapacityError(EverettLabError, RuntimeError):
    """A requested dimension exceeds the configured cap"""

    exit_code = 3

    def __init__(self, message: str, requested: int, cap: int):
        super().__init__(f"{message} (requested {requested}, cap {cap})")
        self.requested = requested
        self.cap = cap


class ConfigError(EverettLabError, ValueError):
    """Experiment configuration is invalid; `key` names the offending entry"""

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None):
        prefix = f"{key}: " if key else ""
        super().__init__(f"{prefix}{message}")
        self.key = key


class PropagationError(EverettLabError, RuntimeError):
    """Norm drift during grid propagation exceeded the contract"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
