"""
everett_lab/__main__.py
Generated: 2026-10-18.1000
Purpose: `python -m everett_lab`, the same click group as the `everett-lab` script
"""

from .main import main

if __name__ == "__main__":
    main()
