"""
Randomized verification suites shared by the CLI `verify` command and the tests
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from modules.core.dispersion import dispersion_energy
from modules.core.errors import PhysicsDomainError
from modules.core.types import ChannelSpec, NodeSpec, Topology, TOPOLOGY_CHANNELS, TOPOLOGY_EDGES
from modules.oracle.wavepacket import LatticeScenario, wavepacket_transmission
from modules.sweep.backends import evaluate
from modules.threeport.design import (
    design_circulator_three_modes_at_k,
    design_circulator_three_modes_equal,
    design_circulator_two_modes,
)

logger = logging.getLogger(__name__)

J_RANGE = (0.2, 2.0)
DELTA_RANGE = (-2.0, 2.0)
GAMMA_RANGE = (0.0, 3.0)
XI_RANGE = (0.6, 1.6)
K_MARGIN = 0.05
BAND_EDGE_MARGIN = 1e-6
RESONANCE_MARGIN = 1e-2


@dataclass(frozen=True)
class Draw:
    node: NodeSpec
    channels: Tuple[ChannelSpec, ...]
    k: float
    incident: str


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    samples: int = 1
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "passed": self.passed,
            "detail": self.detail,
        }


def _admissible(draw: Draw) -> bool:
    xi_in = next(c.xi for c in draw.channels if c.label == draw.incident)
    energy = dispersion_energy(draw.k, xi_in)
    for channel in draw.channels:
        if abs(abs(energy) - 2.0 * channel.xi) < BAND_EDGE_MARGIN * channel.xi:
            return False
    for mode in draw.node.modes:
        if mode.gamma == 0.0 and abs(energy - mode.delta) < RESONANCE_MARGIN:
            return False
    return True


def random_admissible_draw(
    rng: np.random.Generator,
    topology: Topology,
    lossless: bool = False,
    max_attempts: int = 1000,
) -> Draw:
    """
    Random node, channels and incident wavenumber away from band edges and poles

    Args:
        rng: numpy Generator (seeded by the caller)
        topology: Coupling graph to draw
        lossless: Force gamma = 0 on every mode (two-port only draws damping)
        max_attempts: Rejection budget
    """
    topology = Topology(topology)
    labels = TOPOLOGY_CHANNELS[topology]
    for _ in range(max_attempts):
        couplings = {edge: rng.uniform(*J_RANGE) for edge in TOPOLOGY_EDGES[topology]}
        modes = ("d1", "d2", "d3") if topology is Topology.CIRCULATOR_THREE_MODES else ("d1", "d2")
        deltas = {mode: rng.uniform(*DELTA_RANGE) for mode in modes}
        gammas = {}
        if topology is Topology.TWO_PORT and not lossless:
            gammas = {mode: rng.uniform(*GAMMA_RANGE) for mode in modes}
        phi = rng.uniform(0.0, 2.0 * math.pi)
        node = NodeSpec.from_couplings(topology, couplings, phi, deltas, gammas)

        xis = {"a": 1.0, "b": 1.0, "c": 1.0}
        xis[labels[-1]] = rng.uniform(*XI_RANGE)
        channels = tuple(ChannelSpec(label, xis[label]) for label in labels)
        incident = labels[int(rng.integers(len(labels)))]
        k = rng.uniform(K_MARGIN, math.pi - K_MARGIN)
        draw = Draw(node, channels, k, incident)
        if _admissible(draw):
            return draw
    raise RuntimeError(f"no admissible {topology.value} draw in {max_attempts} attempts")


def _max_difference(first: np.ndarray, second: np.ndarray) -> float:
    mask = np.isfinite(first) & np.isfinite(second)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(first[mask] - second[mask])))


def closed_vs_boundary(
    rng: np.random.Generator, draws: int = 1000, tolerance: float = 1e-10
) -> List[CheckResult]:
    """Entrywise agreement of the closed forms with the boundary-condition oracle"""
    checks = []
    for topology in Topology:
        worst, skipped = 0.0, 0
        for _ in range(draws):
            draw = random_admissible_draw(rng, topology)
            try:
                closed = evaluate(draw.node, draw.channels, draw.k, draw.incident, "closed")
                oracle = evaluate(draw.node, draw.channels, draw.k, draw.incident, "boundary")
            except PhysicsDomainError as exc:
                logger.warning("skipping draw: %s", exc.reason)
                skipped += 1
                continue
            worst = max(worst, _max_difference(closed.amplitudes, oracle.amplitudes))
        checks.append(CheckResult(
            f"closed-vs-boundary/{topology.value}",
            worst if skipped < draws else float("nan"),
            tolerance,
            draws - skipped,
            f"{skipped} draws skipped" if skipped else "",
        ))
    return checks


def _design_points() -> List[Tuple[str, NodeSpec, Tuple[ChannelSpec, ...], float]]:
    points = []
    for phi in (0.5 * math.pi, 1.5 * math.pi):
        for k in (0.25 * math.pi, 0.75 * math.pi):
            design = design_circulator_two_modes(1.2, phi, k)
            points.append((f"two-mode design phi={phi:.4f} k={k:.4f}", design.to_node(), design.channels(), k))
    for design in design_circulator_three_modes_equal(math.pi / 3):
        points.append((f"equal design k={design.k:.4f}", design.to_node(), design.channels(), design.k))
    for k in (0.1 * math.pi, 0.2 * math.pi, 0.8 * math.pi, 0.9 * math.pi):
        design = design_circulator_three_modes_at_k(k)
        points.append((f"tunable design k={k:.4f}", design.to_node(), design.channels(), k))
    return points


def conservation_suite(
    rng: np.random.Generator, draws: int = 1000, tolerance: float = 1e-9
) -> List[CheckResult]:
    """Column sums of lossless flow matrices over the open channels"""
    checks = []
    for topology in Topology:
        worst, skipped = 0.0, 0
        for _ in range(draws):
            draw = random_admissible_draw(rng, topology, lossless=True)
            try:
                result = evaluate(draw.node, draw.channels, draw.k, draw.incident)
            except PhysicsDomainError as exc:
                logger.warning("skipping draw: %s", exc.reason)
                skipped += 1
                continue
            worst = max(worst, result.conservation_residual())
        checks.append(CheckResult(
            f"conservation/{topology.value}",
            worst if skipped < draws else float("nan"),
            tolerance,
            draws - skipped,
            f"{skipped} draws skipped" if skipped else "",
        ))

    worst, names = 0.0, []
    for name, node, channels, k in _design_points():
        residual = evaluate(node, channels, k, "a").conservation_residual()
        if residual > worst:
            worst, names = residual, [name]
    checks.append(CheckResult("conservation/designs", worst, tolerance, len(_design_points()),
                              f"worst at {names[0]}" if names else ""))
    return checks


def wavepacket_suite(
    scenario: Optional[LatticeScenario] = None, tolerance: float = 2e-2
) -> List[CheckResult]:
    """Time-domain flow estimates against the closed-form flows"""
    scenario = scenario or LatticeScenario()
    cases = []

    design = design_circulator_two_modes(1.2, 0.5 * math.pi, 0.25 * math.pi)
    cases.append(("wavepacket/two-mode-circulator", design.to_node(), design.channels()))
    decoupled = NodeSpec.two_port(j1=0.0, j2=0.0)
    cases.append(("wavepacket/decoupled", decoupled, (ChannelSpec("a"), ChannelSpec("b"))))
    lossless_converter = NodeSpec.two_port(j1=1.0, j2=1.2, phi=0.5 * math.pi)
    cases.append(("wavepacket/lossless-converter", lossless_converter, (ChannelSpec("a"), ChannelSpec("b"))))

    checks = []
    for name, node, channels in cases:
        closed = evaluate(node, channels, scenario.carrier_k, "a")
        estimate = wavepacket_transmission(scenario, "a", node, channels)
        residual = max(abs(estimate.flow(out) - closed.flow(out, "a")) for out in closed.labels)
        checks.append(CheckResult(name, residual, tolerance, 1,
                                  f"norm drift {estimate.norm_drift:.2e}, {estimate.steps} steps"))
    return checks
