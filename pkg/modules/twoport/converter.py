"""
Two-port frequency converter - closed-form S-matrix and flows
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from modules.core.dispersion import channel_statuses, incident_energy
from modules.core.effective import node_self_energy, require_open_or_closed
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


@dataclass(frozen=True)
class TwoPortEffectiveParams:
    """Energy-dependent couplings and complex frequency shifts of the converter node"""

    j_ab: complex
    j_ba: complex
    delta_a: complex
    delta_b: complex
    energy: float


def _require_two_port(node: NodeSpec) -> None:
    if node.topology is not Topology.TWO_PORT:
        raise InvalidSpec(f"two-port routine called with a {node.topology.value} node")


def effective_two_port(energy: float, node: NodeSpec, xi_ref: float = 1.0) -> TwoPortEffectiveParams:
    """
    Effective parameters induced by the two mechanical modes

    Every mode enters with its own E - delta_i + i gamma_i; setting gamma_1 = 0
    recovers the usual single-damped-mode converter.

    Args:
        energy: Scattering energy E
        node: Two-port node
        xi_ref: Reference hopping for the pole tolerance

    Returns:
        TwoPortEffectiveParams with J_ab (e^{+i phi}), J_ba (e^{-i phi}), delta_a, delta_b
    """
    _require_two_port(node)
    g = node_self_energy(energy, node, xi_ref)
    return TwoPortEffectiveParams(
        j_ab=complex(g[0, 1]),
        j_ba=complex(g[1, 0]),
        delta_a=complex(g[0, 0]),
        delta_b=complex(g[1, 1]),
        energy=float(energy),
    )


def two_port_amplitudes(
    params: TwoPortEffectiveParams,
    status_a: ChannelStatus,
    status_b: ChannelStatus,
) -> np.ndarray:
    """
    Closed-form 2x2 amplitude matrix

    With in_l = xi_l z_l and out_l = xi_l / z_l:

        D    = (out_a + delta_a)(out_b + delta_b) - J_ab J_ba
        s_aa = (J_ab J_ba - (in_a + delta_a)(out_b + delta_b)) / D
        s_ba = J_ba (in_a - out_a) / D
        s_ab = J_ab (in_b - out_b) / D
        s_bb = (J_ab J_ba - (out_a + delta_a)(in_b + delta_b)) / D
    """
    in_a, out_a = status_a.xi * status_a.z, status_a.xi / status_a.z
    in_b, out_b = status_b.xi * status_b.z, status_b.xi / status_b.z
    cross = params.j_ab * params.j_ba
    det = (out_a + params.delta_a) * (out_b + params.delta_b) - cross
    scale = abs(out_a + params.delta_a) * abs(out_b + params.delta_b) + abs(cross)
    if abs(det) < 1e-12 * max(scale, 1e-300):
        raise SingularNodeMatrix(f"singular node matrix at E={params.energy:.12g} (D={det:.3e})")

    s = np.empty((2, 2), dtype=complex)
    s[0, 0] = (cross - (in_a + params.delta_a) * (out_b + params.delta_b)) / det
    s[1, 0] = params.j_ba * (in_a - out_a) / det
    s[0, 1] = params.j_ab * (in_b - out_b) / det
    s[1, 1] = (cross - (out_a + params.delta_a) * (in_b + params.delta_b)) / det
    return s


def smatrix_two_port(
    incident_k: float,
    incident: str,
    node: NodeSpec,
    channels: Sequence[ChannelSpec],
) -> ScatteringResult:
    """
    Scattering matrix of the two-port converter

    Args:
        incident_k: Wavenumber of the incident photon in its own channel
        incident: Incident channel label ("a" or "b"); fixes the shared energy
        node: Two-port node
        channels: Channel specs for a and b

    Returns:
        ScatteringResult over (a, b); a closed partner channel gets zero flow
    """
    _require_two_port(node)
    channels = arrange_channels(channels, node.topology)
    energy = incident_energy(incident_k, incident, channels)
    statuses = channel_statuses(energy, channels)
    require_open_or_closed(statuses, node.channel_labels)

    params = effective_two_port(energy, node, xi_ref=channels[0].xi)
    amplitudes = two_port_amplitudes(params, statuses[0], statuses[1])
    for column, status in enumerate(statuses):
        if not status.is_propagating:
            amplitudes[:, column] = np.nan
    flows = flow_matrix(amplitudes, statuses)
    logger.debug("two-port at E=%.6f: I_ab=%.6g I_ba=%.6g", energy, flows[0, 1], flows[1, 0])
    return ScatteringResult(
        labels=node.channel_labels,
        amplitudes=amplitudes,
        flows=flows,
        statuses=statuses,
        energy=energy,
        incident=incident,
        backend="closed",
    )
