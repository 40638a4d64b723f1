"""
Dispersion of a semi-infinite CRW: E = -2 xi cos k
"""

import math
from typing import Iterable, List, Tuple

from modules.core.errors import BandEdgeError, DomainError, InvalidSpec, VelocityUndefined
from modules.core.types import ChannelSpec, ChannelStatus

# |E| within BAND_EDGE_RTOL * xi of 2 xi counts as the band edge
BAND_EDGE_RTOL = 1e-9


def _check_xi(xi: float) -> None:
    if not xi > 0:
        raise InvalidSpec(f"hopping strength must be > 0, got {xi}")


def _check_wavenumber(k: float) -> None:
    if not math.isfinite(k):
        raise DomainError(f"wavenumber must be finite, got {k}")
    if k <= 0.0 or k >= math.pi:
        if abs(k) <= BAND_EDGE_RTOL or abs(k - math.pi) <= BAND_EDGE_RTOL:
            raise BandEdgeError(f"band edge: k={k:g} is outside (0, pi)")
        raise DomainError(f"wavenumber k={k:g} is outside (0, pi)")


def dispersion_energy(k: float, xi: float) -> float:
    """
    Energy of a photon with wavenumber k in a CRW with hopping xi

    Args:
        k: Wavenumber, strictly inside (0, pi)
        xi: Hopping strength

    Returns:
        E = -2 xi cos k
    """
    _check_xi(xi)
    _check_wavenumber(k)
    return -2.0 * xi * math.cos(k)


def channel_status_from_energy(energy: float, xi: float) -> ChannelStatus:
    """
    Classify a channel at the shared scattering energy

    Inside the band the principal wavenumber in (0, pi) is returned. Outside it
    the amplitude factor z = e^{ik} is the root of xi (z + 1/z) = -E with
    |z| < 1, so the outgoing wave decays into the arm.
    """
    _check_xi(xi)
    half_band = 2.0 * xi
    if abs(abs(energy) - half_band) <= BAND_EDGE_RTOL * xi:
        return ChannelStatus.band_edge(xi)

    if abs(energy) < half_band:
        # atan2 keeps full precision near both band edges
        k = math.atan2(math.sqrt((half_band - energy) * (half_band + energy)), -energy)
        return ChannelStatus.propagating(k, xi)

    t = -energy / xi
    large_root = 0.5 * (t + math.copysign(math.sqrt(t * t - 4.0), t))
    return ChannelStatus.evanescent(1.0 / large_root, xi)


def group_velocity(k: float, xi: float) -> float:
    """Group velocity xi sin k of a propagating channel"""
    _check_xi(xi)
    if not (0.0 < k < math.pi) or 1.0 - abs(math.cos(k)) <= 0.5 * BAND_EDGE_RTOL:
        raise VelocityUndefined(f"band edge: group velocity undefined at k={k:g}")
    return xi * math.sin(k)


def band_overlap(channels: Iterable[ChannelSpec]) -> Tuple[float, float]:
    """Energy window in which every channel propagates"""
    narrowest = min(channel.xi for channel in channels)
    return (-2.0 * narrowest, 2.0 * narrowest)


def isolated_wavenumbers(xi_incident: float, xi_others: Iterable[float]) -> List[Tuple[float, float]]:
    """
    Incident wavenumber windows where every other channel is closed

    A photon launched there is totally reflected. Empty when the incident band
    does not stick out of all the other bands.
    """
    _check_xi(xi_incident)
    widest = max(xi_others)
    if widest >= xi_incident:
        return []
    edge = math.acos(widest / xi_incident)
    return [(0.0, edge), (math.pi - edge, math.pi)]


def incident_energy(k: float, incident: str, channels: Iterable[ChannelSpec]) -> float:
    """Shared scattering energy fixed by the incident channel's wavenumber"""
    for channel in channels:
        if channel.label == incident:
            return dispersion_energy(k, channel.xi)
    raise InvalidSpec(f"incident channel {incident!r} is not part of the scenario")


def channel_statuses(energy: float, channels: Iterable[ChannelSpec]) -> Tuple[ChannelStatus, ...]:
    return tuple(channel_status_from_energy(energy, channel.xi) for channel in channels)
