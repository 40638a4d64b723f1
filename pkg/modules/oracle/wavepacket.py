"""
Wavepacket oracle - single-excitation time evolution on truncated arms
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from modules.core.dispersion import channel_statuses, dispersion_energy
from modules.core.effective import coupling_matrix
from modules.core.errors import DomainError, InvalidSpec, NormDrift, PacketNotCleared, UnsupportedScenario
from modules.core.types import ChannelSpec, NodeSpec, arrange_channels

# (2,2) Pade approximant of exp(x) factors over the roots 3 +- i sqrt(3)
PADE_ROOTS = (complex(3.0, math.sqrt(3.0)), complex(3.0, -math.sqrt(3.0)))

NORM_TOL = 1e-9
CLEARANCE_TOL = 1e-3
CARRIER_MARGIN = 0.1


@dataclass(frozen=True)
class LatticeScenario:
    """
    Truncated-lattice set-up for one wavepacket run

    Args:
        sites_per_arm: N sites per waveguide arm (site 0 touches the node)
        packet_width: Gaussian width sigma in sites
        carrier_k: Carrier wavenumber in the incident arm
        packet_center: Launch site; 5 sigma when omitted
        evolution_time: Total time; derived from the group velocities when omitted
        time_step: Step in units of 1/xi_max
    """

    sites_per_arm: int = 400
    packet_width: float = 20.0
    carrier_k: float = 0.25 * math.pi
    packet_center: Optional[int] = None
    evolution_time: Optional[float] = None
    time_step: float = 0.02

    def __post_init__(self):
        if self.packet_width <= 0:
            raise InvalidSpec(f"packet width must be > 0, got {self.packet_width}")
        if self.time_step <= 0 or self.time_step > 0.02:
            raise InvalidSpec(f"time step must lie in (0, 0.02], got {self.time_step}")
        if self.packet_center is None:
            object.__setattr__(self, "packet_center", int(round(5 * self.packet_width)))
        sigma = self.packet_width
        if self.packet_center < 4 * sigma:
            raise InvalidSpec(f"packet center {self.packet_center} closer than 4 sigma to the node")
        if self.sites_per_arm < self.packet_center + 7 * sigma:
            raise InvalidSpec(
                f"{self.sites_per_arm} sites per arm cannot hold a sigma={sigma:g} packet "
                f"launched at site {self.packet_center}"
            )


@dataclass
class WavepacketResult:
    incident: str
    estimates: Dict[str, float]
    node_population: float
    far_end_population: float
    norm_drift: float
    steps: int
    time: float
    scenario: LatticeScenario = field(repr=False, default=None)

    def flow(self, out: str) -> float:
        return self.estimates[out]


class WavepacketSimulator:
    """Builds the lattice Hamiltonian once and evolves packets through the node"""

    def __init__(self, node: NodeSpec, channels: Sequence[ChannelSpec], scenario: LatticeScenario):
        if not node.is_lossless:
            raise UnsupportedScenario(
                "wavepacket oracle needs gamma = 0 on every mode; validate damped nodes with the boundary solver"
            )
        self.node = node
        self.channels = arrange_channels(channels, node.topology)
        self.scenario = scenario
        self.logger = self._setup_logger()
        self.hamiltonian = self._build_hamiltonian()

    def _setup_logger(self) -> logging.Logger:
        logger = logging.getLogger("WavepacketSimulator")
        logger.setLevel(logging.INFO)
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        return logger

    @property
    def arm_sites(self) -> int:
        return self.scenario.sites_per_arm

    def _site(self, arm: int, j: int) -> int:
        return arm * self.arm_sites + j

    def _mode_site(self, i: int) -> int:
        return len(self.channels) * self.arm_sites + i

    def _build_hamiltonian(self) -> sparse.csc_matrix:
        n = self.arm_sites
        size = len(self.channels) * n + len(self.node.modes)
        rows, cols, values = [], [], []

        for arm, channel in enumerate(self.channels):
            for j in range(n - 1):
                a, b = self._site(arm, j), self._site(arm, j + 1)
                rows += [a, b]
                cols += [b, a]
                values += [-channel.xi, -channel.xi]

        for i, mode in enumerate(self.node.modes):
            rows.append(self._mode_site(i))
            cols.append(self._mode_site(i))
            values.append(mode.delta)

        c = coupling_matrix(self.node)
        for arm in range(len(self.channels)):
            for i in range(len(self.node.modes)):
                if c[arm, i] == 0:
                    continue
                rows += [self._site(arm, 0), self._mode_site(i)]
                cols += [self._mode_site(i), self._site(arm, 0)]
                values += [c[arm, i], np.conj(c[arm, i])]

        return sparse.coo_matrix((values, (rows, cols)), shape=(size, size), dtype=complex).tocsc()

    def initial_state(self, incident: str) -> np.ndarray:
        """Normalized Gaussian packet exp(-(j-j0)^2 / (4 sigma^2)) e^{-ikj} heading for the node"""
        arm = self._arm(incident)
        j = np.arange(self.arm_sites)
        sigma = self.scenario.packet_width
        packet = np.exp(-((j - self.scenario.packet_center) ** 2) / (4.0 * sigma ** 2)) * np.exp(
            -1j * self.scenario.carrier_k * j
        )
        psi = np.zeros(self.hamiltonian.shape[0], dtype=complex)
        psi[arm * self.arm_sites: (arm + 1) * self.arm_sites] = packet
        return psi / np.linalg.norm(psi)

    def _arm(self, label: str) -> int:
        labels = [channel.label for channel in self.channels]
        if label not in labels:
            raise InvalidSpec(f"incident channel {label!r} is not part of the lattice")
        return labels.index(label)

    def evolution_time(self, incident: str) -> float:
        """
        Time for the packet to reach the node and for the fastest outgoing
        packet's leading edge to get within 3 sigma of its far end
        """
        if self.scenario.evolution_time is not None:
            return self.scenario.evolution_time
        channel = self.channels[self._arm(incident)]
        energy = dispersion_energy(self.scenario.carrier_k, channel.xi)
        # lattice group velocity dE/dk in sites per unit time
        velocities = [2.0 * s.velocity for s in channel_statuses(energy, self.channels) if s.is_propagating]
        v_in = 2.0 * channel.xi * math.sin(self.scenario.carrier_k)
        sigma = self.scenario.packet_width
        return self.scenario.packet_center / v_in + (self.arm_sites - 7.0 * sigma) / max(velocities)

    def _check_carrier(self, incident: str) -> None:
        channel = self.channels[self._arm(incident)]
        energy = dispersion_energy(self.scenario.carrier_k, channel.xi)
        if abs(energy) >= 2.0 * channel.xi * (1.0 - CARRIER_MARGIN):
            raise DomainError(
                f"carrier k={self.scenario.carrier_k:.6f} too close to the band edge of arm {incident}"
            )

    def run(self, incident: str) -> WavepacketResult:
        self._check_carrier(incident)
        total_time = self.evolution_time(incident)
        xi_max = max(channel.xi for channel in self.channels)
        dt_max = self.scenario.time_step / xi_max
        steps = max(1, int(math.ceil(total_time / dt_max)))
        dt = total_time / steps

        identity = sparse.identity(self.hamiltonian.shape[0], dtype=complex, format="csc")
        factors = []
        for root in PADE_ROOTS:
            implicit = splu((identity + (1j * dt / root) * self.hamiltonian).tocsc())
            explicit = (identity - (1j * dt / root) * self.hamiltonian).tocsr()
            factors.append((implicit, explicit))

        psi = self.initial_state(incident)
        self.logger.info(
            f"Evolving {incident}-incident packet: sigma={self.scenario.packet_width:g}, "
            f"N={self.arm_sites}, T={total_time:.2f}, steps={steps}"
        )
        drift = 0.0
        for step in range(1, steps + 1):
            for implicit, explicit in factors:
                psi = implicit.solve(explicit @ psi)
            if step % 200 == 0 or step == steps:
                drift = abs(np.vdot(psi, psi).real - 1.0)
                if drift > NORM_TOL:
                    raise NormDrift(f"norm drift {drift:.3e} after {step} steps exceeds {NORM_TOL:g}")

        return self._measure(incident, psi, drift, steps, total_time)

    def _measure(self, incident: str, psi: np.ndarray, drift: float, steps: int, total_time: float) -> WavepacketResult:
        n = self.arm_sites
        width = int(math.ceil(self.scenario.packet_width))
        density = np.abs(psi) ** 2
        estimates, node_population, far_end = {}, 0.0, 0.0
        for arm, channel in enumerate(self.channels):
            arm_density = density[arm * n: (arm + 1) * n]
            estimates[channel.label] = float(arm_density.sum())
            node_population += float(arm_density[:width].sum())
            far_end += float(arm_density[n - width:].sum())
        node_population += float(density[len(self.channels) * n:].sum())

        if node_population > CLEARANCE_TOL or far_end > CLEARANCE_TOL:
            raise PacketNotCleared(
                f"packet not cleared: node region {node_population:.3e}, far ends {far_end:.3e} "
                f"(limit {CLEARANCE_TOL:g})"
            )
        return WavepacketResult(
            incident=incident,
            estimates=estimates,
            node_population=node_population,
            far_end_population=far_end,
            norm_drift=drift,
            steps=steps,
            time=total_time,
            scenario=self.scenario,
        )


def wavepacket_transmission(
    scenario: LatticeScenario,
    incident: str,
    node: NodeSpec,
    channels: Sequence[ChannelSpec],
) -> WavepacketResult:
    """
    Time-domain flow estimates for one incident channel

    Args:
        scenario: Lattice and packet parameters
        incident: Incident channel label
        node: Lossless mechanical node
        channels: Channel specs

    Returns:
        WavepacketResult whose estimates[l'] approximates I[l', incident]
    """
    return WavepacketSimulator(node, channels, scenario).run(incident)
