"""
Node self-energy obtained by eliminating the mechanical-mode amplitudes

With c[l, i] = J[l, i] e^{-i theta} (theta = phi on the (b, d1) edge only),

    G[l, l'] = sum_i c[l, i] conj(c[l', i]) / (E - delta_i + i gamma_i)

G[a, b] is the effective coupling J_ab (carrying e^{+i phi}), G[b, a] is J_ba
and the diagonal holds the frequency shifts delta_l. The node equations at
site 0 then read M s = N u_in with

    M = diag(xi_l / z_l) + G,   N = -(diag(xi_l z_l) + G)
"""

import logging
from typing import Sequence, Tuple

import numpy as np

from modules.core.errors import BandEdgeError, PoleAtMechanicalResonance
from modules.core.types import PHASE_EDGE, ChannelKind, ChannelStatus, NodeSpec

logger = logging.getLogger(__name__)

POLE_RTOL = 1e-9


def coupling_matrix(node: NodeSpec) -> np.ndarray:
    """c[l, i] for channels in node order and modes in node order"""
    channels = node.channel_labels
    modes = node.mode_labels
    c = np.zeros((len(channels), len(modes)), dtype=complex)
    for edge in node.edges:
        phase = np.exp(-1j * node.phi) if edge.key == PHASE_EDGE else 1.0
        c[channels.index(edge.channel), modes.index(edge.mode)] = edge.strength * phase
    return c


def mode_denominators(energy: float, node: NodeSpec) -> np.ndarray:
    return np.array([energy - mode.delta + 1j * mode.gamma for mode in node.modes])


def check_poles(energy: float, node: NodeSpec, xi_ref: float = 1.0) -> None:
    """Refuse energies on an undamped mechanical resonance"""
    for mode in node.modes:
        if mode.gamma == 0.0 and abs(energy - mode.delta) <= POLE_RTOL * xi_ref:
            raise PoleAtMechanicalResonance(
                f"pole: E={energy:.12g} sits on the resonance of undamped mode {mode.label} "
                f"(delta={mode.delta:.12g}); use the boundary backend"
            )


def node_self_energy(energy: float, node: NodeSpec, xi_ref: float = 1.0) -> np.ndarray:
    check_poles(energy, node, xi_ref)
    c = coupling_matrix(node)
    weights = 1.0 / mode_denominators(energy, node)
    return (c * weights) @ c.conj().T


def require_open_or_closed(statuses: Sequence[ChannelStatus], labels: Sequence[str]) -> None:
    for label, status in zip(labels, statuses):
        if status.kind is ChannelKind.BAND_EDGE:
            raise BandEdgeError(f"band edge: channel {label} sits on its band edge")


def node_matrices(
    energy: float,
    statuses: Sequence[ChannelStatus],
    node: NodeSpec,
    xi_ref: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Node matrices M and N of the scattering problem M S = N

    Args:
        energy: Shared scattering energy
        statuses: Channel statuses in node channel order
        node: Mechanical node
        xi_ref: Reference hopping used for the pole tolerance

    Returns:
        (M, N) complex square matrices
    """
    require_open_or_closed(statuses, node.channel_labels)
    g = node_self_energy(energy, node, xi_ref)
    xi = np.array([s.xi for s in statuses])
    z = np.array([s.z for s in statuses])
    m = np.diag(xi / z) + g
    n = -(np.diag(xi * z) + g)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("node matrices at E=%.6f: |det M|=%.3e", energy, abs(np.linalg.det(m)))
    return m, n

