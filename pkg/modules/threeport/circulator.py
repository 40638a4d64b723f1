"""
T-shaped three-port circulators - S = M^-1 N for both coupling graphs
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from modules.core.dispersion import channel_statuses, incident_energy
from modules.core.effective import node_matrices, node_self_energy
from modules.core.errors import InvalidSpec, SingularNodeMatrix
from modules.core.flows import flow_matrix
from modules.core.types import (
    ChannelSpec,
    ChannelStatus,
    NodeSpec,
    ScatteringResult,
    Topology,
    arrange_channels,
)

logger = logging.getLogger(__name__)

SINGULAR_RTOL = 1e-12


class CirculationDirection(str, Enum):
    CLOCKWISE = "clockwise"                  # a -> b -> c -> a
    COUNTERCLOCKWISE = "counterclockwise"    # a -> c -> b -> a

    @property
    def path(self) -> str:
        return "a→b→c→a" if self is CirculationDirection.CLOCKWISE else "a→c→b→a"

    @property
    def target_flows(self) -> Tuple[Tuple[str, str], ...]:
        """(out, incident) pairs that carry unit flow"""
        if self is CirculationDirection.CLOCKWISE:
            return (("b", "a"), ("c", "b"), ("a", "c"))
        return (("c", "a"), ("a", "b"), ("b", "c"))


@dataclass(frozen=True)
class ThreePortEffectiveParams:
    """
    Effective couplings and frequency shifts of a lossless three-port node

    j_ab is stored as a magnitude with its phase phi_prime; j_ca, j_bc and the
    shifts are real because their defining sums carry no phase factor.
    """

    j_ab: float
    phi_prime: float
    j_ca: float
    j_bc: float
    delta_a: float
    delta_b: float
    delta_c: float
    energy: float

    @property
    def j_ab_complex(self) -> complex:
        return self.j_ab * cmath.exp(1j * self.phi_prime)


def _require_three_port(node: NodeSpec) -> None:
    if node.topology is Topology.TWO_PORT:
        raise InvalidSpec("three-port routine called with a two_port node")


def effective_three_port(energy: float, node: NodeSpec, xi_ref: float = 1.0) -> ThreePortEffectiveParams:
    _require_three_port(node)
    g = node_self_energy(energy, node, xi_ref)
    j_ab = complex(g[0, 1])
    return ThreePortEffectiveParams(
        j_ab=abs(j_ab),
        phi_prime=cmath.phase(j_ab) % (2.0 * math.pi),
        j_ca=float(g[2, 0].real),
        j_bc=float(g[1, 2].real),
        delta_a=float(g[0, 0].real),
        delta_b=float(g[1, 1].real),
        delta_c=float(g[2, 2].real),
        energy=float(energy),
    )


def renormalized_channel(status: ChannelStatus, delta: float) -> Tuple[float, float]:
    """(xi', k') with xi' e^{ik'} = xi e^{ik} + delta; informational only"""
    value = status.xi * status.z + delta
    return abs(value), cmath.phase(value)


def smatrix_three_port(
    incident_k: float,
    incident: str,
    node: NodeSpec,
    channels: Sequence[ChannelSpec],
) -> ScatteringResult:
    """
    Scattering matrix of a three-port circulator node

    Args:
        incident_k: Wavenumber of the incident photon in its own channel
        incident: Incident channel label; fixes the shared energy
        node: CirculatorTwoModes or CirculatorThreeModes node
        channels: Channel specs for a, b and c

    Returns:
        ScatteringResult over (a, b, c); closed channels carry no flow and
        their incident columns are NaN
    """
    _require_three_port(node)
    channels = arrange_channels(channels, node.topology)
    energy = incident_energy(incident_k, incident, channels)
    statuses = channel_statuses(energy, channels)
    m, n = node_matrices(energy, statuses, node, xi_ref=channels[0].xi)

    # scale-free singularity test
    condition = np.linalg.cond(m)
    if not np.isfinite(condition) or condition * SINGULAR_RTOL > 1.0:
        raise SingularNodeMatrix(f"singular node matrix at E={energy:.12g} (cond M={condition:.3e})")
    amplitudes = np.linalg.solve(m, n)

    for column, status in enumerate(statuses):
        if not status.is_propagating:
            amplitudes[:, column] = np.nan
    flows = flow_matrix(amplitudes, statuses)
    return ScatteringResult(
        labels=node.channel_labels,
        amplitudes=amplitudes,
        flows=flows,
        statuses=statuses,
        energy=energy,
        incident=incident,
        backend="closed",
    )


def classify_circulation(result: ScatteringResult, tol: float = 1e-6) -> Optional[CirculationDirection]:
    """Direction of perfect circulation, or None when the flows are not a permutation"""
    if len(result.labels) != 3 or result.closed_channels:
        return None
    for direction in CirculationDirection:
        targets = set(direction.target_flows)
        perfect = True
        for out in result.labels:
            for inc in result.labels:
                expected = 1.0 if (out, inc) in targets else 0.0
                if abs(result.flow(out, inc) - expected) > tol:
                    perfect = False
        if perfect:
            return direction
    return None


def dominant_direction(result: ScatteringResult, incident: str = "a") -> CirculationDirection:
    """Direction suggested by where a photon from `incident` mostly goes"""
    forward = {"a": "b", "b": "c", "c": "a"}[incident]
    backward = {"a": "c", "b": "a", "c": "b"}[incident]
    if result.flow(forward, incident) >= result.flow(backward, incident):
        return CirculationDirection.CLOCKWISE
    return CirculationDirection.COUNTERCLOCKWISE
