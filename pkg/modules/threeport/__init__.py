"""Three-port single-photon circulators"""

from modules.threeport.circulator import (
    CirculationDirection,
    ThreePortEffectiveParams,
    classify_circulation,
    effective_three_port,
    renormalized_channel,
    smatrix_three_port,
)
from modules.threeport.design import (
    CirculatorDesign,
    design_circulator_three_modes_at_k,
    design_circulator_three_modes_equal,
    design_circulator_two_modes,
    side_coupling,
    symmetric_design_wavenumber,
)
