"""
Shared fixtures for the everett-lab test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# the package lives under lab/ (setup.py package_dir)
LAB_DIR = Path(__file__).resolve().parent.parent / "lab"
if str(LAB_DIR) not in sys.path:
    sys.path.insert(0, str(LAB_DIR))


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to a JSON file and return its path"""
    import json

    def _write(payload, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
