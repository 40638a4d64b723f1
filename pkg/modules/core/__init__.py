"""Shared scattering core: types, dispersion, flows, node self-energy"""

from modules.core.dispersion import (
    band_overlap,
    channel_status_from_energy,
    channel_statuses,
    dispersion_energy,
    group_velocity,
    incident_energy,
    isolated_wavenumbers,
)
from modules.core.flows import flow_matrix, flows_from_amplitudes, nonreciprocity_contrast
from modules.core.types import (
    CHANNEL_ORDER,
    ChannelKind,
    ChannelSpec,
    ChannelStatus,
    CouplingEdge,
    MechanicalModeSpec,
    NodeSpec,
    ScatteringResult,
    Topology,
)
