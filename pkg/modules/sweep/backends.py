"""
Backend dispatch - closed forms by topology, or the boundary-condition oracle
"""

from typing import Sequence

from modules.core.errors import InvalidSpec
from modules.core.types import ChannelSpec, NodeSpec, ScatteringResult, Topology
from modules.oracle.boundary_solver import solve_boundary_system
from modules.threeport.circulator import smatrix_three_port
from modules.twoport.converter import smatrix_two_port

BACKENDS = ("closed", "boundary")


def evaluate(
    node: NodeSpec,
    channels: Sequence[ChannelSpec],
    k: float,
    channel: str,
    backend: str = "closed",
) -> ScatteringResult:
    """
    Scattering result at the energy fixed by wavenumber k in `channel`

    Args:
        node: Mechanical node
        channels: Channel specs
        k: Wavenumber in `channel`
        channel: Channel whose k sets the shared energy
        backend: "closed" or "boundary"
    """
    if backend == "boundary":
        return solve_boundary_system(k, channel, node, channels)
    if backend != "closed":
        raise InvalidSpec(f"unknown backend {backend!r}, expected one of {BACKENDS}")
    if node.topology is Topology.TWO_PORT:
        return smatrix_two_port(k, channel, node, channels)
    return smatrix_three_port(k, channel, node, channels)
