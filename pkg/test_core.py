#!/usr/bin/env python3
"""
Core tests: dispersion, channel statuses, flows, node validation
"""

import math
import sys

import numpy as np
import pytest

from modules.core.dispersion import (
    band_overlap,
    channel_status_from_energy,
    channel_statuses,
    dispersion_energy,
    group_velocity,
    incident_energy,
    isolated_wavenumbers,
)
from modules.core.effective import check_poles, node_self_energy
from modules.core.errors import (
    BandEdgeError,
    DomainError,
    InvalidSpec,
    PoleAtMechanicalResonance,
    VelocityUndefined,
)
from modules.core.flows import flow_matrix, flows_from_amplitudes, nonreciprocity_contrast
from modules.core.types import (
    ChannelKind,
    ChannelSpec,
    ChannelStatus,
    CouplingEdge,
    MechanicalModeSpec,
    NodeSpec,
    Topology,
)
from modules.twoport.converter import smatrix_two_port


# ============================================================
# Dispersion
# ============================================================

def test_energy_values():
    assert dispersion_energy(0.5 * math.pi, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert dispersion_energy(0.25 * math.pi, 1.0) == pytest.approx(-math.sqrt(2.0), rel=1e-15)
    assert dispersion_energy(math.pi / 3, 2.0) == pytest.approx(-2.0, rel=1e-15)


def test_band_edges_rejected():
    with pytest.raises(BandEdgeError, match="band edge"):
        dispersion_energy(0.0, 1.0)
    with pytest.raises(BandEdgeError):
        dispersion_energy(math.pi, 1.0)


def test_out_of_range_wavenumber():
    with pytest.raises(DomainError):
        dispersion_energy(4.0, 1.0)


def test_nonpositive_hopping():
    with pytest.raises(InvalidSpec):
        dispersion_energy(1.0, 0.0)


def test_round_trip():
    delta = 1e-3
    for k in np.linspace(delta, math.pi - delta, 2001):
        status = channel_status_from_energy(dispersion_energy(k, 1.3), 1.3)
        assert status.kind is ChannelKind.PROPAGATING
        assert status.k == pytest.approx(k, abs=1e-12)


def test_evanescent_root():
    status = channel_status_from_energy(-3.0, 1.0)
    assert status.kind is ChannelKind.EVANESCENT
    assert abs(status.z) == pytest.approx(0.38196601, abs=1e-8)
    for energy in (-3.0, 2.5, -10.0, 4.0 + 1e-6):
        z = channel_status_from_energy(energy, 1.0).z
        assert abs(z) < 1.0
        assert abs(1.0 * (z + 1.0 / z) + energy) < 1e-12


def test_band_edge_status():
    assert channel_status_from_energy(2.0, 1.0).kind is ChannelKind.BAND_EDGE
    assert channel_status_from_energy(-4.0, 2.0).kind is ChannelKind.BAND_EDGE


def test_group_velocity():
    assert group_velocity(0.5 * math.pi, 1.5) == pytest.approx(1.5)
    with pytest.raises(VelocityUndefined):
        group_velocity(0.0, 1.0)
    with pytest.raises(VelocityUndefined):
        ChannelStatus.band_edge(1.0).velocity


def test_incident_energy_uses_incident_hopping():
    channels = (ChannelSpec("a"), ChannelSpec("b"), ChannelSpec("c", 2.0))
    assert incident_energy(math.pi / 3, "c", channels) == pytest.approx(-2.0)
    with pytest.raises(InvalidSpec):
        incident_energy(1.0, "d", channels)


# ============================================================
# Band helpers
# ============================================================

def test_band_overlap():
    assert band_overlap([ChannelSpec("a"), ChannelSpec("c", 1.5)]) == (-2.0, 2.0)


def test_isolated_wavenumbers():
    windows = isolated_wavenumbers(1.5, [1.0, 1.0])
    edge = math.acos(1.0 / 1.5)
    assert windows == [(0.0, pytest.approx(edge)), (pytest.approx(math.pi - edge), math.pi)]
    assert isolated_wavenumbers(1.0, [1.0, 1.5]) == []


def test_isolated_window_reflects_totally():
    node = NodeSpec.two_port(j1=1.0, j2=1.0)
    channels = (ChannelSpec("a"), ChannelSpec("b", 0.5))
    result = smatrix_two_port(0.2, "a", node, channels)
    assert result.closed_channels == ("b",)
    assert result.flow("a", "a") == pytest.approx(1.0, abs=1e-12)
    assert result.flow("b", "a") == 0.0
    assert np.isnan(result.flow("a", "b"))


# ============================================================
# Flows
# ============================================================

def test_decoupled_reflection(two_channels):
    node = NodeSpec.two_port(j1=0.0, j2=0.0)
    k = 0.7
    result = smatrix_two_port(k, "a", node, two_channels)
    np.testing.assert_allclose(result.amplitude("a", "a"), -np.exp(2j * k), atol=1e-14)
    assert result.flow("a", "a") == pytest.approx(1.0)
    assert result.flow("b", "a") == pytest.approx(0.0, abs=1e-30)


def test_closed_rows_are_zero():
    statuses = channel_statuses(-1.5, (ChannelSpec("a"), ChannelSpec("b", 0.5)))
    amplitudes = np.array([[0.5, 0.1], [0.7, 0.2]], dtype=complex)
    column = flows_from_amplitudes(amplitudes, statuses, "a", labels=("a", "b"))
    assert column[1] == 0.0
    with pytest.raises(VelocityUndefined):
        flows_from_amplitudes(amplitudes, statuses, "b", labels=("a", "b"))
    flows = flow_matrix(amplitudes, statuses)
    assert np.isnan(flows[:, 1]).all()


def test_velocity_weighting():
    statuses = channel_statuses(-1.0, (ChannelSpec("a"), ChannelSpec("b", 2.0)))
    amplitudes = np.ones((2, 2), dtype=complex)
    flows = flow_matrix(amplitudes, statuses)
    assert flows[1, 0] == pytest.approx(statuses[1].velocity / statuses[0].velocity)
    assert (flows >= 0).all()


def test_nonreciprocity_contrast():
    flows = np.array([[0.0, 0.1], [1e-3, 0.0]])
    assert nonreciprocity_contrast(flows, 0, 1) == pytest.approx(20.0)
    assert nonreciprocity_contrast(np.zeros((2, 2)), 0, 1) == pytest.approx(0.0)


# ============================================================
# Node spec
# ============================================================

def test_phase_is_wrapped():
    node = NodeSpec.two_port(phi=-0.5 * math.pi)
    assert node.phi == pytest.approx(1.5 * math.pi)


def test_phase_edge_enforced():
    modes = (MechanicalModeSpec("d1"), MechanicalModeSpec("d2"))
    edges = (
        CouplingEdge("a", "d1", 1.0, carries_phase=True),
        CouplingEdge("b", "d1", 1.0),
        CouplingEdge("a", "d2", 1.0),
        CouplingEdge("b", "d2", 1.0),
    )
    with pytest.raises(InvalidSpec, match="phase"):
        NodeSpec(Topology.TWO_PORT, modes, edges)


def test_edge_set_enforced():
    with pytest.raises(InvalidSpec, match="mismatch"):
        NodeSpec.from_couplings(Topology.TWO_PORT, {("a", "d1"): 1.0, ("b", "d1"): 1.0})


def test_circulators_are_lossless():
    node = NodeSpec.circulator_two_modes()
    with pytest.raises(InvalidSpec, match="dissipation-free"):
        node.with_mode("d2", gamma=0.1)


def test_negative_values_rejected():
    with pytest.raises(InvalidSpec):
        MechanicalModeSpec("d1", gamma=-1.0)
    with pytest.raises(InvalidSpec):
        CouplingEdge("a", "d1", -0.5)
    with pytest.raises(InvalidSpec):
        ChannelSpec("a", -1.0)


def test_pole_detection():
    node = NodeSpec.two_port(delta1=-math.sqrt(2.0))
    with pytest.raises(PoleAtMechanicalResonance, match="pole"):
        check_poles(dispersion_energy(0.25 * math.pi, 1.0), node)


def test_self_energy_is_hermitian_when_lossless():
    node = NodeSpec.circulator_three_modes(j1=0.8, j2=1.1, j3=0.9, phi=1.0, delta1=0.3)
    g = node_self_energy(-0.7, node)
    np.testing.assert_allclose(g, g.conj().T, atol=1e-15)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
