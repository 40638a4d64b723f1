"""
Boundary-condition oracle - solves the site-0 and phonon equations directly

Unknowns are the outgoing amplitudes s_l of every channel followed by the
phonon amplitudes u_di. With c[l, i] the phased couplings and A the incident
unit vector, the assembled rows are

    channel l:  -(xi_l / z_l) s_l - sum_i c[l, i] u_di            = xi_l z_l A_l
    mode i:     -sum_l conj(c[l, i]) s_l + (E - delta_i + i gamma_i) u_di
                                                                  = sum_l conj(c[l, i]) A_l

No mode amplitude is eliminated, so energies on a mechanical resonance stay
regular.
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from modules.core.dispersion import channel_statuses, incident_energy
from modules.core.effective import coupling_matrix, mode_denominators, require_open_or_closed
from modules.core.errors import SingularBoundarySystem
from modules.core.flows import flow_matrix
from modules.core.types import ChannelSpec, ChannelStatus, NodeSpec, ScatteringResult, arrange_channels

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class BoundarySystem:
    """Assembled node equations; one right-hand-side column per open incident channel"""

    unknowns: Tuple[str, ...]
    matrix: np.ndarray
    rhs: np.ndarray
    incidents: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def solve(self) -> np.ndarray:
        condition = np.linalg.cond(self.matrix)
        if not np.isfinite(condition) or condition > CONDITION_LIMIT:
            raise SingularBoundarySystem(f"singular boundary system (cond={condition:.3e})")
        return np.linalg.solve(self.matrix, self.rhs)


def assemble_boundary_system(
    energy: float,
    statuses: Sequence[ChannelStatus],
    node: NodeSpec,
) -> BoundarySystem:
    channels = node.channel_labels
    modes = node.mode_labels
    n_ch, n_modes = len(channels), len(modes)
    c = coupling_matrix(node)
    xi = np.array([s.xi for s in statuses])
    z = np.array([s.z for s in statuses])

    matrix = np.zeros((n_ch + n_modes, n_ch + n_modes), dtype=complex)
    matrix[:n_ch, :n_ch] = np.diag(-xi / z)
    matrix[:n_ch, n_ch:] = -c
    matrix[n_ch:, :n_ch] = -c.conj().T
    matrix[n_ch:, n_ch:] = np.diag(mode_denominators(energy, node))

    incidents = tuple(label for label, s in zip(channels, statuses) if s.is_propagating)
    rhs = np.zeros((n_ch + n_modes, len(incidents)), dtype=complex)
    for column, label in enumerate(incidents):
        l = channels.index(label)
        rhs[l, column] = xi[l] * z[l]
        rhs[n_ch:, column] = c[l, :].conj()

    unknowns = tuple(f"s_{label}" for label in channels) + tuple(f"u_{label}" for label in modes)
    return BoundarySystem(unknowns, matrix, rhs, incidents)


def solve_boundary_system(
    incident_k: float,
    incident: str,
    node: NodeSpec,
    channels: Sequence[ChannelSpec],
) -> ScatteringResult:
    """
    Scattering matrix from the raw boundary equations

    Same contract as the closed-form backends, but valid at E = delta_i.
    The phonon amplitudes of each solved column are attached as extras
    ("u_d1[a]" -> |u_d1|^2 for incidence from a).
    """
    channels = arrange_channels(channels, node.topology)
    energy = incident_energy(incident_k, incident, channels)
    statuses = channel_statuses(energy, channels)
    require_open_or_closed(statuses, node.channel_labels)

    system = assemble_boundary_system(energy, statuses, node)
    solution = system.solve()
    n_ch = len(channels)

    amplitudes = np.full((n_ch, n_ch), np.nan, dtype=complex)
    extras = {}
    for column, label in enumerate(system.incidents):
        l = node.channel_labels.index(label)
        amplitudes[:, l] = solution[:n_ch, column]
        for i, mode in enumerate(node.mode_labels):
            extras[f"u_{mode}[{label}]"] = float(abs(solution[n_ch + i, column]) ** 2)

    logger.debug("boundary system at E=%.6f solved for incidents %s", energy, system.incidents)
    return ScatteringResult(
        labels=node.channel_labels,
        amplitudes=amplitudes,
        flows=flow_matrix(amplitudes, statuses),
        statuses=statuses,
        energy=energy,
        incident=incident,
        backend="boundary",
        extras=extras,
    )
