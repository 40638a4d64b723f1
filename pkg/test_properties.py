#!/usr/bin/env python3
"""
Property-based tests: reciprocity, phase duality, unitarity, oracle agreement

Framework: pytest + hypothesis
"""

import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, given, reject, settings, strategies as st

from modules.core.dispersion import dispersion_energy
from modules.core.errors import PhysicsDomainError
from modules.core.types import ChannelSpec, NodeSpec, Topology, TOPOLOGY_EDGES
from modules.sweep.backends import evaluate

# ============================================================
# Strategies
# ============================================================

coupling_strategy = st.floats(min_value=0.2, max_value=2.0)
detuning_strategy = st.floats(min_value=-2.0, max_value=2.0)
damping_strategy = st.floats(min_value=0.0, max_value=3.0)
phase_strategy = st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True)
wavenumber_strategy = st.floats(min_value=0.05, max_value=math.pi - 0.05)
# xi_c >= xi keeps CRW-c open over the whole band of a and b
side_hopping_strategy = st.floats(min_value=1.0, max_value=1.6)

RESONANCE_MARGIN = 1e-2

PROPERTY_SETTINGS = settings(
    max_examples=200, deadline=None, suppress_health_check=[HealthCheck.filter_too_much]
)


@st.composite
def nodes(draw, topology, phi=None, lossy=False):
    topology = Topology(topology)
    couplings = {edge: draw(coupling_strategy) for edge in TOPOLOGY_EDGES[topology]}
    modes = ("d1", "d2", "d3") if topology is Topology.CIRCULATOR_THREE_MODES else ("d1", "d2")
    deltas = {mode: draw(detuning_strategy) for mode in modes}
    gammas = {mode: draw(damping_strategy) for mode in modes} if lossy else {}
    phase = draw(phase_strategy) if phi is None else draw(st.sampled_from(phi))
    return NodeSpec.from_couplings(topology, couplings, phase, deltas, gammas)


def _channels(topology, xi_c=1.0):
    if Topology(topology) is Topology.TWO_PORT:
        return (ChannelSpec("a"), ChannelSpec("b"))
    return (ChannelSpec("a"), ChannelSpec("b"), ChannelSpec("c", xi_c))


def _solve(node, channels, k, backend="closed"):
    """Evaluate away from undamped resonances; reject draws the engine refuses"""
    energy = dispersion_energy(k, 1.0)
    for mode in node.modes:
        if mode.gamma < RESONANCE_MARGIN and abs(energy - mode.delta) < RESONANCE_MARGIN:
            reject()
    try:
        return evaluate(node, channels, k, "a", backend)
    except PhysicsDomainError:
        reject()


three_port_topologies = st.sampled_from([Topology.CIRCULATOR_TWO_MODES, Topology.CIRCULATOR_THREE_MODES])


# ============================================================
# Reciprocity at trivial phase
# ============================================================

@PROPERTY_SETTINGS
@given(node=nodes(Topology.TWO_PORT, phi=(0.0, math.pi), lossy=True), k=wavenumber_strategy)
def test_two_port_reciprocal_at_trivial_phase(node, k):
    result = _solve(node, _channels(Topology.TWO_PORT), k)
    assert abs(result.flow("a", "b") - result.flow("b", "a")) < 1e-12


@PROPERTY_SETTINGS
@given(data=st.data(), k=wavenumber_strategy, xi_c=side_hopping_strategy)
def test_three_port_reciprocal_at_trivial_phase(data, k, xi_c):
    topology = data.draw(three_port_topologies)
    node = data.draw(nodes(topology, phi=(0.0, math.pi)))
    flows = _solve(node, _channels(topology, xi_c), k).flows
    np.testing.assert_allclose(flows, flows.T, atol=1e-10)


# ============================================================
# Reversing the phase transposes the flow matrix
# ============================================================

@PROPERTY_SETTINGS
@given(data=st.data(), k=wavenumber_strategy, xi_c=side_hopping_strategy)
def test_three_port_phase_reversal_transposes_flows(data, k, xi_c):
    topology = data.draw(three_port_topologies)
    node = data.draw(nodes(topology))
    channels = _channels(topology, xi_c)
    forward = _solve(node, channels, k).flows
    backward = _solve(node.with_phi(2.0 * math.pi - node.phi), channels, k).flows
    np.testing.assert_allclose(backward, forward.T, atol=1e-10)


@PROPERTY_SETTINGS
@given(node=nodes(Topology.TWO_PORT, lossy=True), k=wavenumber_strategy)
def test_two_port_phase_reversal_swaps_directions(node, k):
    channels = _channels(Topology.TWO_PORT)
    forward = _solve(node, channels, k)
    backward = _solve(node.with_phi(2.0 * math.pi - node.phi), channels, k)
    assert backward.flow("a", "b") == pytest.approx(forward.flow("b", "a"), abs=1e-12)


# ============================================================
# Flow conservation and absorption
# ============================================================

@PROPERTY_SETTINGS
@given(data=st.data(), k=wavenumber_strategy, xi_c=st.floats(min_value=0.6, max_value=1.6))
def test_lossless_columns_sum_to_one(data, k, xi_c):
    topology = data.draw(st.sampled_from(list(Topology)))
    node = data.draw(nodes(topology))
    result = _solve(node, _channels(topology, xi_c), k)
    assert result.conservation_residual() < 1e-9


@PROPERTY_SETTINGS
@given(node=nodes(Topology.TWO_PORT, lossy=True), k=wavenumber_strategy)
def test_damping_never_adds_flow(node, k):
    result = _solve(node, _channels(Topology.TWO_PORT), k)
    assert result.flow("a", "a") + result.flow("b", "a") <= 1.0 + 1e-12


# ============================================================
# Closed forms agree with the boundary-condition oracle
# ============================================================

@PROPERTY_SETTINGS
@given(data=st.data(), k=wavenumber_strategy, xi_c=st.floats(min_value=0.6, max_value=1.6))
def test_closed_forms_match_boundary_oracle(data, k, xi_c):
    topology = data.draw(st.sampled_from(list(Topology)))
    node = data.draw(nodes(topology, lossy=topology is Topology.TWO_PORT))
    channels = _channels(topology, xi_c)
    closed = _solve(node, channels, k)
    oracle = _solve(node, channels, k, backend="boundary")
    mask = np.isfinite(closed.amplitudes)
    assert (mask == np.isfinite(oracle.amplitudes)).all()
    np.testing.assert_allclose(oracle.amplitudes[mask], closed.amplitudes[mask], rtol=1e-9, atol=1e-10)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
