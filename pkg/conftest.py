"""
Shared fixtures for the scattering engine test suites
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from modules.core.types import ChannelSpec, NodeSpec
from modules.threeport.design import design_circulator_two_modes
from modules.twoport.design import optimal_damping

ROOT = Path(__file__).parent


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: time-domain wavepacket runs")


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def two_channels():
    return (ChannelSpec("a"), ChannelSpec("b"))


@pytest.fixture
def converter_node():
    """Converter at phi = pi/2 with J2 = 4 xi and optimally damped d2"""
    return NodeSpec.two_port(j1=1.0, j2=4.0, phi=0.5 * math.pi, gamma2=optimal_damping(4.0))


@pytest.fixture
def two_mode_design():
    return design_circulator_two_modes(1.2, 0.5 * math.pi, 0.25 * math.pi)


@pytest.fixture
def scenarios_dir():
    return ROOT / "config" / "scenarios"
