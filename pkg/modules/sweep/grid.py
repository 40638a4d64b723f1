"""
Grid sweeps - one scattering evaluation per grid point, gathered in grid order
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from modules.core.dispersion import dispersion_energy
from modules.core.errors import (
    BandEdgeError,
    InvalidSpec,
    PhysicsDomainError,
    PoleAtMechanicalResonance,
    SingularBoundarySystem,
    SingularNodeMatrix,
)
from modules.core.types import (
    CHANNEL_ORDER,
    ChannelSpec,
    NodeSpec,
    TOPOLOGY_EDGES,
    Topology,
    arrange_channels,
)
from modules.sweep.backends import BACKENDS, evaluate
from modules.twoport.design import optimal_damping

SWEEP_VARIABLES = ("k", "delta1", "delta2", "delta3", "phi", "coupling")

# derived rule -> variables it fixes
DERIVED_RULES = {
    "gamma_from_j2": ("gamma2",),
    "delta3_tracks_delta2": ("delta3",),
}

THREADS_ENV = "CRWSCAT_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    """
    One-dimensional parameter sweep over a fixed scenario

    Args:
        node: Mechanical node at the sweep's base point
        channels: Channel specs
        variable: One of SWEEP_VARIABLES
        lo, hi: Sweep range
        steps: Number of grid points (>= 2)
        incident: Incident channel of interest, or "all"
        k: Fixed wavenumber when the sweep variable is not k
        k_channel: Channel whose wavenumber k is; the shared energy follows from it
        edge: (channel, mode) when variable == "coupling"
        derived_rules: Bindings re-evaluated at every grid point
        bindings: Provenance of design-time values (reporting only)
        backend: "closed" or "boundary"
        name: Label used for output files
    """

    node: NodeSpec
    channels: Tuple[ChannelSpec, ...]
    variable: str
    lo: float
    hi: float
    steps: int = 512
    incident: str = "all"
    k: Optional[float] = None
    k_channel: str = "a"
    edge: Optional[Tuple[str, str]] = None
    derived_rules: Tuple[str, ...] = ()
    bindings: Tuple[str, ...] = ()
    backend: str = "closed"
    name: str = "sweep"

    def __post_init__(self):
        object.__setattr__(self, "channels", arrange_channels(self.channels, self.node.topology))
        object.__setattr__(self, "derived_rules", tuple(self.derived_rules))
        object.__setattr__(self, "bindings", tuple(self.bindings))
        labels = self.node.channel_labels

        if self.variable not in SWEEP_VARIABLES:
            raise InvalidSpec(f"unknown sweep variable {self.variable!r}, expected one of {SWEEP_VARIABLES}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise InvalidSpec(f"steps must be an integer >= 2, got {self.steps}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise InvalidSpec(f"sweep range must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if self.backend not in BACKENDS:
            raise InvalidSpec(f"unknown backend {self.backend!r}, expected one of {BACKENDS}")
        if self.incident != "all" and self.incident not in labels:
            raise InvalidSpec(f"incident must be one of {labels} or 'all', got {self.incident!r}")
        if self.k_channel not in labels:
            raise InvalidSpec(f"k channel must be one of {labels}, got {self.k_channel!r}")

        if self.variable == "k":
            if self.lo < 0 or self.hi > math.pi:
                raise InvalidSpec(f"k range must lie within [0, pi], got [{self.lo}, {self.hi}]")
        elif self.k is None:
            raise InvalidSpec(f"a fixed k is required when sweeping {self.variable}")

        if self.variable == "delta3" and self.node.topology is not Topology.CIRCULATOR_THREE_MODES:
            raise InvalidSpec(f"{self.node.topology.value} has no mode d3")
        if self.variable == "coupling":
            if self.edge is None or tuple(self.edge) not in TOPOLOGY_EDGES[self.node.topology]:
                raise InvalidSpec(f"coupling sweep needs an edge of {self.node.topology.value}, got {self.edge}")
            object.__setattr__(self, "edge", tuple(self.edge))

        for rule in self.derived_rules:
            if rule not in DERIVED_RULES:
                raise InvalidSpec(f"unknown derived rule {rule!r}, expected one of {list(DERIVED_RULES)}")
            if self.variable in DERIVED_RULES[rule]:
                raise InvalidSpec(f"{self.variable} is swept and also fixed by derived rule {rule}")
        if "gamma_from_j2" in self.derived_rules and self.node.topology is not Topology.TWO_PORT:
            raise InvalidSpec("gamma_from_j2 applies to two_port nodes only")
        if "delta3_tracks_delta2" in self.derived_rules and self.node.topology is not Topology.CIRCULATOR_THREE_MODES:
            raise InvalidSpec("delta3_tracks_delta2 applies to circ_three_modes nodes only")

    @property
    def incidents(self) -> Tuple[str, ...]:
        return self.node.channel_labels if self.incident == "all" else (self.incident,)

    def grid(self) -> np.ndarray:
        """k grids are offset by half a step so neither band edge is sampled"""
        if self.variable == "k":
            width = (self.hi - self.lo) / self.steps
            return self.lo + (np.arange(self.steps) + 0.5) * width
        return np.linspace(self.lo, self.hi, self.steps)

    def point(self, value: float) -> Tuple[NodeSpec, float]:
        """Node and wavenumber at one grid value, derived rules applied"""
        node, k = self.node, self.k
        if self.variable == "k":
            k = value
        elif self.variable == "phi":
            node = node.with_phi(value)
        elif self.variable == "coupling":
            node = node.with_coupling(self.edge[0], self.edge[1], value)
        else:
            node = node.with_mode(f"d{self.variable[-1]}", delta=value)

        if "delta3_tracks_delta2" in self.derived_rules:
            node = node.with_mode("d3", delta=node.mode("d2").delta)
        if "gamma_from_j2" in self.derived_rules:
            xi = self.channels[0].xi
            node = node.with_mode("d2", gamma=optimal_damping(node.coupling("a", "d2"), xi))
        return node, k

    def describe(self) -> dict:
        return {
            "name": self.name,
            "topology": self.node.topology.value,
            "variable": self.variable if self.variable != "coupling" else f"J_{self.edge[0]}{self.edge[1][1:]}",
            "range": [self.lo, self.hi],
            "steps": self.steps,
            "incident": self.incident,
            "k": self.k,
            "k_channel": self.k_channel,
            "phi": self.node.phi,
            "derived_rules": list(self.derived_rules),
            "bindings": list(self.bindings),
            "backend": self.backend,
        }


@dataclass(frozen=True, eq=False)
class SweepRecord:
    """
    Result at one grid point

    status is "ok", "closed:<labels>" when some channels are evanescent, or a
    skip reason ("band_edge", "pole", "singular", "domain") with NaN flows.
    """

    index: int
    value: float
    energy: float
    status: str
    labels: Tuple[str, ...]
    flows: np.ndarray
    amplitudes: np.ndarray
    statuses: Tuple[str, ...] = ()
    conservation_residual: float = float("nan")
    reason: str = ""
    lossless: bool = True

    @property
    def skipped(self) -> bool:
        return not (self.status == "ok" or self.status.startswith("closed:"))

    def flow(self, out: str, incident: str) -> float:
        return float(self.flows[self.labels.index(out), self.labels.index(incident)])


def _skip_status(exc: PhysicsDomainError) -> str:
    if isinstance(exc, BandEdgeError):
        return "band_edge"
    if isinstance(exc, PoleAtMechanicalResonance):
        return "pole"
    if isinstance(exc, (SingularNodeMatrix, SingularBoundarySystem)):
        return "singular"
    return "domain"


def evaluate_point(spec: SweepSpec, index: int, value: float) -> SweepRecord:
    node, k = spec.point(value)
    labels = node.channel_labels
    xi_k = spec.channels[labels.index(spec.k_channel)].xi
    size = len(labels)
    try:
        energy = dispersion_energy(k, xi_k)
        result = evaluate(node, spec.channels, k, spec.k_channel, spec.backend)
    except PhysicsDomainError as exc:
        energy = -2.0 * xi_k * math.cos(k)
        return SweepRecord(
            index=index,
            value=float(value),
            energy=energy,
            status=_skip_status(exc),
            labels=labels,
            flows=np.full((size, size), np.nan),
            amplitudes=np.full((size, size), np.nan, dtype=complex),
            reason=exc.reason,
            lossless=node.is_lossless,
        )

    closed = result.closed_channels
    return SweepRecord(
        index=index,
        value=float(value),
        energy=result.energy,
        status="ok" if not closed else "closed:" + "".join(closed),
        labels=labels,
        flows=np.array(result.flows),
        amplitudes=np.array(result.amplitudes),
        statuses=tuple(s.describe() for s in result.statuses),
        conservation_residual=result.conservation_residual(),
        lossless=node.is_lossless,
    )


def resolve_threads(configured: Optional[int] = None) -> int:
    """Thread count from CRWSCAT_THREADS, then the config value; 0 means all cores"""
    raw = os.environ.get(THREADS_ENV)
    threads = configured or 0
    if raw:
        try:
            threads = int(raw)
        except ValueError:
            raise InvalidSpec(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if threads < 0:
        raise InvalidSpec(f"thread count must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 4)


class SweepRunner:
    """Evaluates sweep grids on a thread pool"""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = resolve_threads(max_workers)
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        logger = logging.getLogger("SweepRunner")
        logger.setLevel(logging.INFO)
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        return logger

    def run(self, spec: SweepSpec) -> List[SweepRecord]:
        grid = spec.grid()
        self.logger.info(
            f"Sweeping {spec.name}: {spec.variable} over [{spec.lo:.6g}, {spec.hi:.6g}] "
            f"in {spec.steps} steps on {self.max_workers} threads"
        )
        # map keeps grid order regardless of completion order
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            records = list(executor.map(lambda item: evaluate_point(spec, *item), enumerate(grid)))

        skipped = [r for r in records if r.skipped]
        if skipped:
            reasons = sorted({r.status for r in skipped})
            self.logger.warning(f"{len(skipped)} of {len(records)} points skipped ({', '.join(reasons)})")
        return records


def run_sweep(spec: SweepSpec, max_workers: Optional[int] = None) -> List[SweepRecord]:
    """
    Evaluate every grid point of a sweep

    Args:
        spec: Sweep specification
        max_workers: Thread count (None/0: environment or all cores)

    Returns:
        One SweepRecord per grid point, in grid order
    """
    return SweepRunner(max_workers).run(spec)


def conservation_audit(records: Sequence[SweepRecord], tol: float = 1e-9) -> List[int]:
    """
    Indices of lossless records whose open incident columns do not sum to 1

    Damped points are not audited; losslessness is read per point, after any
    derived rule has set the damping.
    """
    failing = []
    for record in records:
        if record.skipped or not record.lossless:
            continue
        residual = record.conservation_residual
        if not np.isfinite(residual) or residual > tol:
            failing.append(record.index)
    return failing


def flow_columns(labels: Sequence[str] = CHANNEL_ORDER) -> List[str]:
    """Row-major flow column names, e.g. I_aa, I_ab, ..."""
    return [f"I_{out}{inc}" for out in labels for inc in labels]


def audited_records(records: Sequence[SweepRecord]) -> int:
    """Number of evaluated lossless records the conservation audit covers"""
    return sum(1 for record in records if record.lossless and not record.skipped)
