#!/usr/bin/env python3
"""
lab/main.py
Generated: 2026-10-17.0900
Purpose: Source-tree entry point for everett-lab without installing the package

Runs the same click CLI as the `everett-lab` console script, e.g.
    python lab/main.py run configs/chebyshev.json
"""

import sys
import os
import logging
from pathlib import Path

script_dir = Path(__file__).parent
sys.path.insert(0, str(script_dir))

logger = logging.getLogger("everett_lab.entry")


def main():
    try:
        from everett_lab.main import main as cli_main
    except ImportError as e:
        logging.basicConfig(format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        logger.error(f"Failed to import everett_lab: {e}")
        logger.error(f"Current directory: {os.getcwd()}")
        logger.error(f"Script directory: {script_dir}")
        sys.exit(1)
    cli_main()


if __name__ == "__main__":
    main()
