"""
Perfect-circulator design solvers for both T-shaped coupling graphs
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from scipy.optimize import bisect

from modules.core.dispersion import dispersion_energy
from modules.core.errors import (
    DegeneratePhase,
    InvalidSpec,
    KOutOfDesignRange,
    NegativeRadicand,
    PhaseOutOfDesignRange,
)
from modules.core.types import ChannelSpec, NodeSpec, Topology
from modules.threeport.circulator import (
    CirculationDirection,
    dominant_direction,
    effective_three_port,
    smatrix_three_port,
)

logger = logging.getLogger(__name__)

ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class CirculatorDesign:
    """Operating point of a perfect circulator"""

    topology: Topology
    couplings: Tuple[Tuple[str, str, float], ...]
    xi: float
    xi_c: float
    phi: float
    k: float
    direction: Optional[CirculationDirection] = None

    def __post_init__(self):
        if not (0.0 < self.k < math.pi):
            raise InvalidSpec(f"design wavenumber must lie in (0, pi), got {self.k}")
        if self.xi_c <= 0 or self.xi <= 0:
            raise InvalidSpec("design hoppings must be > 0")
        weak = [(c, m) for c, m, j in self.couplings if not j > 0]
        if weak:
            raise InvalidSpec(f"design couplings must be > 0, got zero on {weak}")

    def coupling(self, channel: str, mode: str) -> float:
        for c, m, j in self.couplings:
            if (c, m) == (channel, mode):
                return j
        raise InvalidSpec(f"design has no edge ({channel},{mode})")

    def to_node(self) -> NodeSpec:
        return NodeSpec.from_couplings(
            self.topology, {(c, m): j for c, m, j in self.couplings}, self.phi
        )

    def channels(self) -> Tuple[ChannelSpec, ...]:
        return (ChannelSpec("a", self.xi), ChannelSpec("b", self.xi), ChannelSpec("c", self.xi_c))

    def summary(self) -> Dict[str, float]:
        values = {f"J_{c}{m[1:]}": j for c, m, j in self.couplings}
        values.update({"xi_c": self.xi_c, "phi": self.phi, "k": self.k})
        return values


def _with_direction(design: CirculatorDesign) -> CirculatorDesign:
    """Label the design by the flows it actually produces"""
    result = smatrix_three_port(design.k, "a", design.to_node(), design.channels())
    direction = dominant_direction(result, "a")
    logger.debug("design at k=%.6f phi=%.6f circulates %s", design.k, design.phi, direction.path)
    return replace(design, direction=direction)


def _is_angle(value: float, target: float) -> bool:
    return abs(cmath.exp(1j * value) - cmath.exp(1j * target)) <= ANGLE_TOL


def _require_quarter_phase(phi: float) -> None:
    if not (_is_angle(phi, 0.5 * math.pi) or _is_angle(phi, 1.5 * math.pi)):
        raise PhaseOutOfDesignRange(f"phase out of design range: phi={phi:.12g} (need pi/2 or 3pi/2)")


def two_mode_xi_c(node: NodeSpec, k: float, xi: float = 1.0) -> float:
    """
    Hopping of CRW-c that closes the two-mode circulator

        xi_c = | J_bc^2 / (xi e^{-ik} + delta_a) - delta_c |

    evaluated at E = -2 xi cos k.
    """
    params = effective_three_port(dispersion_energy(k, xi), node, xi_ref=xi)
    value = params.j_bc ** 2 / (xi * cmath.exp(-1j * k) + params.delta_a) - params.delta_c
    return abs(value)


def design_circulator_two_modes(
    j2: float,
    phi: float = 0.5 * math.pi,
    k: float = 0.25 * math.pi,
    j1: float = 1.0,
    xi: float = 1.0,
) -> CirculatorDesign:
    """
    Two-mode circulator at phi in {pi/2, 3pi/2}, k in {pi/4, 3pi/4}

    Args:
        j2: J_{a,2} = J_{b,2}
        phi: Synthetic phase
        k: Operating wavenumber of CRW-a/b
        j1: J_{a,1} = J_{b,1}
        xi: Hopping of CRW-a/b

    Returns:
        CirculatorDesign with J_{c,2} = xi sqrt((J2/xi)^4 + 1) and xi_c closing the node
    """
    _require_quarter_phase(phi)
    if not (_is_angle(k, 0.25 * math.pi) or _is_angle(k, 0.75 * math.pi)):
        raise KOutOfDesignRange(f"k out of design range: k={k:.12g} (need pi/4 or 3pi/4)")
    if not j2 > 0:
        raise InvalidSpec(f"J2 must be > 0, got {j2}")

    node = NodeSpec.circulator_two_modes(j1=j1, j2=j2, jc2=side_coupling(j2, xi), phi=phi)
    xi_c = two_mode_xi_c(node, k, xi)
    couplings = tuple((e.channel, e.mode, e.strength) for e in node.edges)
    design = CirculatorDesign(Topology.CIRCULATOR_TWO_MODES, couplings, xi, xi_c, node.phi, k)
    return _with_direction(design)


def side_coupling(j2: float, xi: float = 1.0) -> float:
    """J_{c,2} = xi sqrt((J2/xi)^4 + 1)"""
    if j2 < 0:
        raise InvalidSpec(f"J2 must be >= 0, got {j2}")
    return xi * math.sqrt((j2 / xi) ** 4 + 1.0)


def _three_mode_couplings(j1: float, j2: float, j3: float) -> Tuple[Tuple[str, str, float], ...]:
    return (
        ("a", "d1", j1), ("b", "d1", j1),
        ("a", "d2", j2), ("c", "d2", j3),
        ("b", "d3", j2), ("c", "d3", j3),
    )


def design_circulator_three_modes_equal(
    phi: float, xi: float = 1.0
) -> Tuple[CirculatorDesign, CirculatorDesign]:
    """
    Equal-coupling three-mode circulator with xi_c = xi

        J^2 / xi^2 = 2 (2 - cos phi) / (5 - 4 cos phi)
        k = 1/2 arcsin |(4 sin phi - sin 2 phi) / (5 - 4 cos phi)|   and   pi - k

    Returns:
        The designs at k and at its mirror pi - k, each labelled by its flows
    """
    if abs(math.sin(phi)) <= ANGLE_TOL:
        raise DegeneratePhase(f"degenerate phase: phi={phi:.12g} is a multiple of pi")
    cos_phi = math.cos(phi)
    j = xi * math.sqrt(2.0 * (2.0 - cos_phi) / (5.0 - 4.0 * cos_phi))
    ratio = abs((4.0 * math.sin(phi) - math.sin(2.0 * phi)) / (5.0 - 4.0 * cos_phi))
    k = 0.5 * math.asin(min(ratio, 1.0))
    node_phi = phi % (2.0 * math.pi)
    designs = tuple(
        _with_direction(CirculatorDesign(
            Topology.CIRCULATOR_THREE_MODES, _three_mode_couplings(j, j, j), xi, xi, node_phi, wavenumber,
        ))
        for wavenumber in (k, math.pi - k)
    )
    return designs


def design_circulator_three_modes_at_k(
    k: float, phi: float = 0.5 * math.pi, xi: float = 1.0
) -> CirculatorDesign:
    """
    Three-mode circulator tuned to an arbitrary k in (0, pi/4) or (3pi/4, pi)

    J1 = xi sqrt|sin 2k|, J2 = xi sqrt(2cos^2 k - |sin 2k|), J3 = xi |cos k| and
    xi_c = xi |cos k / cos(arctan((2cos^2 k - |sin 2k|) / (4 |cos k| sin k)))|.
    J1 sits on (a,d1),(b,d1), J2 on (a,d2),(b,d3), J3 on (c,d2),(c,d3).
    """
    _require_quarter_phase(phi)
    if not (0.0 < k < 0.25 * math.pi or 0.75 * math.pi < k < math.pi):
        raise KOutOfDesignRange(f"k out of design range: k={k:.12g} (need (0, pi/4) or (3pi/4, pi))")

    cos_k = abs(math.cos(k))
    sin_2k = abs(math.sin(2.0 * k))
    radicand = 2.0 * cos_k ** 2 - sin_2k
    if radicand < 0:
        raise NegativeRadicand(f"negative radicand 2cos^2 k - |sin 2k| = {radicand:.3e} at k={k:.12g}")

    j1 = xi * math.sqrt(sin_2k)
    j2 = xi * math.sqrt(radicand)
    j3 = xi * cos_k
    xi_c = xi * abs(cos_k / math.cos(math.atan(radicand / (4.0 * cos_k * math.sin(k)))))
    design = CirculatorDesign(
        Topology.CIRCULATOR_THREE_MODES, _three_mode_couplings(j1, j2, j3), xi, xi_c,
        phi % (2.0 * math.pi), k,
    )
    return _with_direction(design)


def _symmetric_residual(k: float) -> float:
    return 2.0 * math.cos(k) ** 2 - abs(math.sin(2.0 * k)) - 4.0 * math.sin(k) ** 2


def symmetric_design_wavenumber() -> Tuple[float, float]:
    """
    Wavenumber where the tunable design has J1 = J2 = J3 and xi_c = xi

    Root of 2cos^2 k - |sin 2k| = 4 sin^2 k on (0, pi/4), i.e. tan k = 1/2.

    Returns:
        (k, pi - k)
    """
    k = bisect(_symmetric_residual, 0.0, 0.25 * math.pi, xtol=1e-14)
    expected = math.atan(0.5)
    if abs(k - expected) > 1e-12:
        logger.warning("symmetric design root %.15f drifts from arctan(1/2)=%.15f", k, expected)
        raise RuntimeError(f"bisection root {k!r} disagrees with arctan(1/2)")
    return k, math.pi - k
