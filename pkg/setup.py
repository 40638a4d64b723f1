#!/usr/bin/env python3
"""
Setup script for the CRW scattering engine
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="crw-scattering",
    version="1.0.0",
    author="CRW Scattering Team",
    description="Single-photon S-matrices and flows for coupled-resonator waveguides joined by mechanical modes",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["examples", "examples.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "pyyaml>=6.0",
        "pydantic>=2.5.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "hypothesis>=6.80",
            "mpmath>=1.3",
            "black>=23.9.0",
            "flake8>=6.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "crwscat=controller.workflow_controller:main",
        ],
    },
)
