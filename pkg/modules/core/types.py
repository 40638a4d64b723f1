"""
Domain types - channels, mechanical modes, coupling graphs, scattering results
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from modules.core.errors import InvalidSpec, VelocityUndefined

CHANNEL_ORDER = ("a", "b", "c")
MODE_ORDER = ("d1", "d2", "d3")
PHASE_EDGE = ("b", "d1")
TWO_PI = 2.0 * math.pi


class Topology(str, Enum):
    TWO_PORT = "two_port"
    CIRCULATOR_TWO_MODES = "circ_two_modes"
    CIRCULATOR_THREE_MODES = "circ_three_modes"


TOPOLOGY_CHANNELS = {
    Topology.TWO_PORT: ("a", "b"),
    Topology.CIRCULATOR_TWO_MODES: ("a", "b", "c"),
    Topology.CIRCULATOR_THREE_MODES: ("a", "b", "c"),
}

TOPOLOGY_MODES = {
    Topology.TWO_PORT: ("d1", "d2"),
    Topology.CIRCULATOR_TWO_MODES: ("d1", "d2"),
    Topology.CIRCULATOR_THREE_MODES: ("d1", "d2", "d3"),
}

_TWO_PORT_EDGES = (("a", "d1"), ("b", "d1"), ("a", "d2"), ("b", "d2"))

TOPOLOGY_EDGES = {
    Topology.TWO_PORT: _TWO_PORT_EDGES,
    Topology.CIRCULATOR_TWO_MODES: _TWO_PORT_EDGES + (("c", "d2"),),
    Topology.CIRCULATOR_THREE_MODES: (
        ("a", "d1"), ("b", "d1"), ("a", "d2"), ("c", "d2"), ("b", "d3"), ("c", "d3"),
    ),
}


def _finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidSpec(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class ChannelSpec:
    """One semi-infinite waveguide (CRW) with hopping strength xi"""

    label: str
    xi: float = 1.0

    def __post_init__(self):
        if self.label not in CHANNEL_ORDER:
            raise InvalidSpec(f"unknown channel label: {self.label!r}")
        xi = _finite(self.xi, f"xi of channel {self.label}")
        if xi <= 0:
            raise InvalidSpec(f"xi of channel {self.label} must be > 0, got {xi}")
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True)
class MechanicalModeSpec:
    label: str
    delta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.label not in MODE_ORDER:
            raise InvalidSpec(f"unknown mode label: {self.label!r}")
        object.__setattr__(self, "delta", _finite(self.delta, f"delta of {self.label}"))
        gamma = _finite(self.gamma, f"gamma of {self.label}")
        if gamma < 0:
            raise InvalidSpec(f"gamma of {self.label} must be >= 0, got {gamma}")
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class CouplingEdge:
    channel: str
    mode: str
    strength: float
    carries_phase: bool = False

    def __post_init__(self):
        strength = _finite(self.strength, f"J({self.channel},{self.mode})")
        if strength < 0:
            raise InvalidSpec(f"J({self.channel},{self.mode}) must be >= 0, got {strength}")
        object.__setattr__(self, "strength", strength)

    @property
    def key(self) -> Tuple[str, str]:
        return (self.channel, self.mode)


@dataclass(frozen=True)
class NodeSpec:
    """
    Mechanical node joining the waveguides

    The synthetic phase phi sits on the (b, d1) edge in every topology and is
    stored wrapped into [0, 2*pi).
    """

    topology: Topology
    modes: Tuple[MechanicalModeSpec, ...]
    edges: Tuple[CouplingEdge, ...]
    phi: float = 0.0

    def __post_init__(self):
        try:
            topology = Topology(self.topology)
        except ValueError:
            raise InvalidSpec(f"unknown topology: {self.topology!r}")
        object.__setattr__(self, "topology", topology)

        modes = {}
        for mode in self.modes:
            if mode.label in modes:
                raise InvalidSpec(f"duplicate mode: {mode.label}")
            modes[mode.label] = mode
        expected_modes = TOPOLOGY_MODES[topology]
        if set(modes) != set(expected_modes):
            raise InvalidSpec(
                f"{topology.value} needs modes {list(expected_modes)}, got {sorted(modes)}"
            )
        object.__setattr__(self, "modes", tuple(modes[label] for label in expected_modes))

        edges = {}
        for edge in self.edges:
            if edge.key in edges:
                raise InvalidSpec(f"duplicate coupling edge: {edge.key}")
            edges[edge.key] = edge
        expected_edges = TOPOLOGY_EDGES[topology]
        if set(edges) != set(expected_edges):
            missing = sorted(set(expected_edges) - set(edges))
            extra = sorted(set(edges) - set(expected_edges))
            raise InvalidSpec(
                f"{topology.value} coupling edges mismatch (missing {missing}, unexpected {extra})"
            )
        phased = [key for key, edge in edges.items() if edge.carries_phase]
        if phased != [PHASE_EDGE]:
            raise InvalidSpec(f"exactly the {PHASE_EDGE} edge must carry the phase, got {phased}")
        object.__setattr__(self, "edges", tuple(edges[key] for key in expected_edges))

        if topology is not Topology.TWO_PORT:
            damped = [mode.label for mode in self.modes if mode.gamma != 0.0]
            if damped:
                raise InvalidSpec(f"circulator topologies are dissipation-free, damped modes: {damped}")

        phi = _finite(self.phi, "phi") % TWO_PI
        object.__setattr__(self, "phi", phi)

    @property
    def channel_labels(self) -> Tuple[str, ...]:
        return TOPOLOGY_CHANNELS[self.topology]

    @property
    def mode_labels(self) -> Tuple[str, ...]:
        return tuple(mode.label for mode in self.modes)

    @property
    def is_lossless(self) -> bool:
        return all(mode.gamma == 0.0 for mode in self.modes)

    def mode(self, label: str) -> MechanicalModeSpec:
        for mode in self.modes:
            if mode.label == label:
                return mode
        raise InvalidSpec(f"mode {label} not present in {self.topology.value}")

    def coupling(self, channel: str, mode: str) -> float:
        for edge in self.edges:
            if edge.key == (channel, mode):
                return edge.strength
        return 0.0

    def with_phi(self, phi: float) -> "NodeSpec":
        return replace(self, phi=phi)

    def with_mode(self, label: str, delta: Optional[float] = None, gamma: Optional[float] = None) -> "NodeSpec":
        current = self.mode(label)
        updated = MechanicalModeSpec(
            label,
            current.delta if delta is None else delta,
            current.gamma if gamma is None else gamma,
        )
        return replace(self, modes=tuple(updated if m.label == label else m for m in self.modes))

    def with_coupling(self, channel: str, mode: str, strength: float) -> "NodeSpec":
        if (channel, mode) not in TOPOLOGY_EDGES[self.topology]:
            raise InvalidSpec(f"{self.topology.value} has no edge ({channel},{mode})")
        edges = tuple(
            CouplingEdge(e.channel, e.mode, strength, e.carries_phase) if e.key == (channel, mode) else e
            for e in self.edges
        )
        return replace(self, edges=edges)

    @classmethod
    def from_couplings(
        cls,
        topology: Topology,
        couplings: Dict[Tuple[str, str], float],
        phi: float = 0.0,
        deltas: Optional[Dict[str, float]] = None,
        gammas: Optional[Dict[str, float]] = None,
    ) -> "NodeSpec":
        """Build a node from an edge -> J mapping; the phase edge is flagged automatically"""
        topology = Topology(topology)
        deltas = deltas or {}
        gammas = gammas or {}
        modes = tuple(
            MechanicalModeSpec(label, deltas.get(label, 0.0), gammas.get(label, 0.0))
            for label in TOPOLOGY_MODES[topology]
        )
        edges = tuple(
            CouplingEdge(channel, mode, strength, (channel, mode) == PHASE_EDGE)
            for (channel, mode), strength in couplings.items()
        )
        return cls(topology, modes, edges, phi)

    @classmethod
    def two_port(
        cls,
        j1: float = 1.0,
        j2: float = 1.0,
        phi: float = 0.0,
        delta1: float = 0.0,
        delta2: float = 0.0,
        gamma1: float = 0.0,
        gamma2: float = 0.0,
    ) -> "NodeSpec":
        """Symmetric frequency converter: J_{a,1}=J_{b,1}=j1, J_{a,2}=J_{b,2}=j2"""
        couplings = {("a", "d1"): j1, ("b", "d1"): j1, ("a", "d2"): j2, ("b", "d2"): j2}
        return cls.from_couplings(
            Topology.TWO_PORT, couplings, phi,
            {"d1": delta1, "d2": delta2}, {"d1": gamma1, "d2": gamma2},
        )

    @classmethod
    def circulator_two_modes(
        cls,
        j1: float = 1.0,
        j2: float = 1.0,
        jc2: float = 1.0,
        phi: float = 0.0,
        delta1: float = 0.0,
        delta2: float = 0.0,
    ) -> "NodeSpec":
        couplings = {
            ("a", "d1"): j1, ("b", "d1"): j1,
            ("a", "d2"): j2, ("b", "d2"): j2, ("c", "d2"): jc2,
        }
        return cls.from_couplings(
            Topology.CIRCULATOR_TWO_MODES, couplings, phi, {"d1": delta1, "d2": delta2}
        )

    @classmethod
    def circulator_three_modes(
        cls,
        j1: float = 1.0,
        j2: float = 1.0,
        j3: float = 1.0,
        phi: float = 0.0,
        delta1: float = 0.0,
        delta2: float = 0.0,
        delta3: float = 0.0,
    ) -> "NodeSpec":
        """J1 on (a,d1),(b,d1); J2 on (a,d2),(b,d3); J3 on (c,d2),(c,d3)"""
        couplings = {
            ("a", "d1"): j1, ("b", "d1"): j1,
            ("a", "d2"): j2, ("b", "d3"): j2,
            ("c", "d2"): j3, ("c", "d3"): j3,
        }
        return cls.from_couplings(
            Topology.CIRCULATOR_THREE_MODES, couplings, phi,
            {"d1": delta1, "d2": delta2, "d3": delta3},
        )


def arrange_channels(channels: Iterable[ChannelSpec], topology: Topology) -> Tuple[ChannelSpec, ...]:
    """Return the channels in (a, b, c) order, checking they match the topology"""
    by_label = {}
    for channel in channels:
        if channel.label in by_label:
            raise InvalidSpec(f"duplicate channel: {channel.label}")
        by_label[channel.label] = channel
    expected = TOPOLOGY_CHANNELS[Topology(topology)]
    if set(by_label) != set(expected):
        raise InvalidSpec(f"{Topology(topology).value} needs channels {list(expected)}, got {sorted(by_label)}")
    return tuple(by_label[label] for label in expected)


class ChannelKind(str, Enum):
    PROPAGATING = "propagating"
    EVANESCENT = "evanescent"
    BAND_EDGE = "band_edge"


@dataclass(frozen=True)
class ChannelStatus:
    """
    Propagation status of one channel at a given energy

    z is the amplitude factor e^{ik} of the outgoing wave: on the unit circle
    for a propagating channel, real with |z| < 1 for an evanescent one.
    """

    kind: ChannelKind
    xi: float
    k: Optional[float] = None
    decay: Optional[float] = None
    z: complex = 0j

    @classmethod
    def propagating(cls, k: float, xi: float) -> "ChannelStatus":
        return cls(ChannelKind.PROPAGATING, xi, k=k, z=complex(math.cos(k), math.sin(k)))

    @classmethod
    def evanescent(cls, z: float, xi: float) -> "ChannelStatus":
        return cls(ChannelKind.EVANESCENT, xi, decay=-math.log(abs(z)), z=complex(z, 0.0))

    @classmethod
    def band_edge(cls, xi: float) -> "ChannelStatus":
        return cls(ChannelKind.BAND_EDGE, xi)

    @property
    def is_propagating(self) -> bool:
        return self.kind is ChannelKind.PROPAGATING

    @property
    def velocity(self) -> float:
        """Group velocity xi*sin(k); undefined for closed or band-edge channels"""
        if not self.is_propagating:
            raise VelocityUndefined(f"group velocity undefined for a {self.kind.value} channel")
        return self.xi * math.sin(self.k)

    def describe(self) -> str:
        if self.kind is ChannelKind.PROPAGATING:
            return f"propagating(k={self.k:.6f})"
        if self.kind is ChannelKind.EVANESCENT:
            return f"evanescent(decay={self.decay:.6f})"
        return "band_edge"


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ScatteringResult:
    """
    Amplitudes s[l', l] and flows I[l', l], rows/columns in (a, b, c) order

    Columns of incident channels that do not propagate at this energy are NaN.
    """

    labels: Tuple[str, ...]
    amplitudes: np.ndarray
    flows: np.ndarray
    statuses: Tuple[ChannelStatus, ...]
    energy: float
    incident: str
    backend: str = "closed"
    extras: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "statuses", tuple(self.statuses))
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes, complex))
        object.__setattr__(self, "flows", _frozen(self.flows, float))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidSpec(f"channel {label} not part of this result {self.labels}")

    def amplitude(self, out: str, incident: str) -> complex:
        return complex(self.amplitudes[self.index(out), self.index(incident)])

    def flow(self, out: str, incident: str) -> float:
        return float(self.flows[self.index(out), self.index(incident)])

    def status(self, label: str) -> ChannelStatus:
        return self.statuses[self.index(label)]

    @property
    def open_channels(self) -> Tuple[str, ...]:
        return tuple(l for l, s in zip(self.labels, self.statuses) if s.is_propagating)

    @property
    def closed_channels(self) -> Tuple[str, ...]:
        return tuple(l for l, s in zip(self.labels, self.statuses) if not s.is_propagating)

    def column_sum(self, incident: str) -> float:
        return float(np.sum(self.flows[:, self.index(incident)]))

    def conservation_residual(self) -> float:
        """max |1 - sum of flows| over solved incident columns"""
        residuals = [abs(1.0 - self.column_sum(label)) for label in self.open_channels]
        return max(residuals) if residuals else float("nan")

    def flow_items(self) -> Sequence[Tuple[str, float]]:
        """("I_ba", value) pairs in row-major (out, incident) order"""
        return [
            (f"I_{out}{inc}", float(self.flows[i, j]))
            for i, out in enumerate(self.labels)
            for j, inc in enumerate(self.labels)
        ]
