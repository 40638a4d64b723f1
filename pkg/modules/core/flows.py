"""
Scattering flows I[l', l] = |s[l', l]|^2 v[l'] / v[l]
"""

import math
from typing import Sequence, Union

import numpy as np

from modules.core.errors import VelocityUndefined
from modules.core.types import CHANNEL_ORDER, ChannelStatus

FLOW_FLOOR = 1e-16


def flows_from_amplitudes(
    amplitudes: np.ndarray,
    statuses: Sequence[ChannelStatus],
    incident: Union[str, int],
    labels: Sequence[str] = CHANNEL_ORDER,
) -> np.ndarray:
    """
    Flow column for one incident channel

    Args:
        amplitudes: Square complex matrix s[l', l]
        statuses: Channel status per row/column
        incident: Incident channel label or column index
        labels: Channel labels in matrix order

    Returns:
        Real vector I[:, incident]; rows of closed channels are exactly 0
    """
    column = incident if isinstance(incident, int) else list(labels[: len(statuses)]).index(incident)
    source = statuses[column]
    if not source.is_propagating:
        raise VelocityUndefined(
            f"incident channel {labels[column]} is not propagating ({source.kind.value})"
        )
    v_in = source.velocity
    flows = np.zeros(len(statuses))
    for row, status in enumerate(statuses):
        if status.is_propagating:
            flows[row] = abs(amplitudes[row, column]) ** 2 * status.velocity / v_in
    return flows


def flow_matrix(amplitudes: np.ndarray, statuses: Sequence[ChannelStatus]) -> np.ndarray:
    """Full flow matrix; columns of non-propagating incident channels are NaN"""
    size = len(statuses)
    flows = np.full((size, size), np.nan)
    for column, status in enumerate(statuses):
        if status.is_propagating:
            flows[:, column] = flows_from_amplitudes(amplitudes, statuses, column)
    return flows


def nonreciprocity_contrast(flows: np.ndarray, out: int, incident: int) -> float:
    """10 log10(I[out, incident] / I[incident, out]) in dB, flows floored at 1e-16"""
    forward = max(float(flows[out, incident]), FLOW_FLOOR)
    backward = max(float(flows[incident, out]), FLOW_FLOOR)
    return 10.0 * math.log10(forward / backward)
