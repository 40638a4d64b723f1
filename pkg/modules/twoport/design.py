"""
Optimal conditions for nonreciprocal single-photon frequency conversion
"""

import math
from dataclasses import dataclass
from typing import List

from modules.core.errors import InvalidSpec
from modules.core.types import NodeSpec


@dataclass(frozen=True)
class ConverterPoint:
    """
    One optimal (phi, k) pair and the transfer it favours

    source -> target is the dominant transfer; the reverse one is suppressed.
    """

    phi: float
    k: float
    source: str
    target: str

    @property
    def label(self) -> str:
        return f"{self.target}→{self.source} suppressed"

    @property
    def dominant_flow(self) -> str:
        return f"I_{self.target}{self.source}"


def optimal_damping(j2: float, xi: float = 1.0) -> float:
    """gamma = xi * sqrt(2 (J2/xi)^4 + 2)"""
    if j2 < 0:
        raise InvalidSpec(f"J2 must be >= 0, got {j2}")
    if not xi > 0:
        raise InvalidSpec(f"hopping strength must be > 0, got {xi}")
    return xi * math.sqrt(2.0 * (j2 / xi) ** 4 + 2.0)


def optimal_converter_points() -> List[ConverterPoint]:
    """
    The four optimal operating points {pi/2, 3pi/2} x {pi/4, 3pi/4}

    At phi = pi/2 and k = pi/4 the photon goes from b to a (I_ab large); moving
    k to 3pi/4 or phi to 3pi/2 reverses the direction, doing both restores it.
    """
    points = []
    for phi in (0.5 * math.pi, 1.5 * math.pi):
        for k in (0.25 * math.pi, 0.75 * math.pi):
            reversed_ = (phi > math.pi) != (k > 0.5 * math.pi)
            source, target = ("a", "b") if reversed_ else ("b", "a")
            points.append(ConverterPoint(phi=phi, k=k, source=source, target=target))
    return points


def design_converter(
    j2: float,
    phi: float,
    j1: float = 1.0,
    xi: float = 1.0,
    delta1: float = 0.0,
    delta2: float = 0.0,
) -> NodeSpec:
    """Two-port node with the second mode damped at its optimal rate"""
    return NodeSpec.two_port(
        j1=j1, j2=j2, phi=phi, delta1=delta1, delta2=delta2,
        gamma1=0.0, gamma2=optimal_damping(j2, xi),
    )
