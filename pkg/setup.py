#!/usr/bin/env python3
"""
Setup script for everett-lab
"""

from setuptools import setup, find_packages

setup(
    name="everett-lab",
    version="0.1.0",
    description="Numerical checks of branch structure, frequency statistics and grid wavepackets",
    package_dir={"": "lab"},
    packages=find_packages("lab"),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.11",
        "pydantic>=2.5",
        "pydantic-settings>=2.1",
        "python-dotenv>=1.0",
        "click>=8.1",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "hypothesis>=6.80",
        ],
    },
    entry_points={
        "console_scripts": [
            "everett-lab=everett_lab.main:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
