"""Independent verification backends: boundary-condition solver and wavepacket oracle"""

from modules.oracle.boundary_solver import BoundarySystem, assemble_boundary_system, solve_boundary_system
from modules.oracle.wavepacket import LatticeScenario, WavepacketResult, WavepacketSimulator, wavepacket_transmission
