"""
Figure catalog - exact parameter bindings of every published flow figure
"""

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from modules.core.errors import UnknownFigure
from modules.core.types import ChannelSpec, NodeSpec
from modules.sweep.grid import SweepSpec
from modules.threeport.design import (
    CirculatorDesign,
    design_circulator_three_modes_at_k,
    design_circulator_three_modes_equal,
    design_circulator_two_modes,
)

DEFAULT_STEPS = 512
DEFAULT_DELTA_RANGE = (-4.0, 4.0)
K_RANGE = (0.0, math.pi)

# literal caption value, kept off the exact beam-splitter resonance k = pi/6
BEAM_SPLITTER_K = 0.5236

PANELS = "abcdef"
INCIDENTS = ("a", "b", "c")


def _two_port_channels() -> Tuple[ChannelSpec, ...]:
    return (ChannelSpec("a"), ChannelSpec("b"))


def _converter_k_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    phi, j2 = {
        "a": (0.5 * math.pi, 2.0),
        "b": (1.5 * math.pi, 2.0),
        "c": (0.5 * math.pi, 4.0),
        "d": (1.5 * math.pi, 4.0),
    }[panel]
    return SweepSpec(
        node=NodeSpec.two_port(j1=1.0, j2=j2, phi=phi),
        channels=_two_port_channels(),
        variable="k",
        lo=K_RANGE[0],
        hi=K_RANGE[1],
        steps=steps,
        derived_rules=("gamma_from_j2",),
        bindings=("gamma2 = xi sqrt(2 (J2/xi)^4 + 2)",),
        name=f"fig2{panel}",
    )


def _converter_detuning_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    variable, k = {
        "a": ("delta1", 0.25 * math.pi),
        "b": ("delta2", 0.25 * math.pi),
        "c": ("delta1", 0.75 * math.pi),
        "d": ("delta2", 0.75 * math.pi),
    }[panel]
    return SweepSpec(
        node=NodeSpec.two_port(j1=1.0, j2=4.0, phi=0.5 * math.pi),
        channels=_two_port_channels(),
        variable=variable,
        lo=delta_range[0],
        hi=delta_range[1],
        steps=steps,
        k=k,
        derived_rules=("gamma_from_j2",),
        bindings=("gamma2 = xi sqrt(2 (J2/xi)^4 + 2)",),
        name=f"fig3{panel}",
    )


def _design_binding(design: CirculatorDesign) -> Tuple[str, ...]:
    values = ", ".join(f"{key}={value:.12g}" for key, value in design.summary().items())
    return (f"{design.topology.value} design: {values}",)


def _two_mode_k_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    index = PANELS.index(panel)
    phi = 0.5 * math.pi if index < 3 else 1.5 * math.pi
    incident = INCIDENTS[index % 3]
    design = design_circulator_two_modes(1.2, phi, 0.25 * math.pi)
    return SweepSpec(
        node=design.to_node(),
        channels=design.channels(),
        variable="k",
        lo=K_RANGE[0],
        hi=K_RANGE[1],
        steps=steps,
        incident=incident,
        k_channel=incident,
        bindings=_design_binding(design),
        name=f"fig5{panel}",
    )


def _two_mode_detuning_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    index = PANELS.index(panel)
    design = design_circulator_two_modes(1.2, 0.5 * math.pi, 0.25 * math.pi)
    return SweepSpec(
        node=design.to_node(),
        channels=design.channels(),
        variable="delta1" if index < 3 else "delta2",
        lo=delta_range[0],
        hi=delta_range[1],
        steps=steps,
        incident=INCIDENTS[index % 3],
        k=design.k,
        k_channel="a",
        bindings=_design_binding(design),
        name=f"fig6{panel}",
    )


def _three_mode_k_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    index = PANELS.index(panel)
    phi = math.pi / 3 if index < 3 else 5 * math.pi / 3
    incident = INCIDENTS[index % 3]
    design = design_circulator_three_modes_equal(phi)[0]
    return SweepSpec(
        node=design.to_node(),
        channels=design.channels(),
        variable="k",
        lo=K_RANGE[0],
        hi=K_RANGE[1],
        steps=steps,
        incident=incident,
        k_channel=incident,
        bindings=_design_binding(design),
        name=f"fig8{panel}",
    )


def _three_mode_detuning_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    index = PANELS.index(panel)
    design = design_circulator_three_modes_equal(math.pi / 3)[0]
    rules = () if index < 3 else ("delta3_tracks_delta2",)
    return SweepSpec(
        node=design.to_node(),
        channels=design.channels(),
        variable="delta1" if index < 3 else "delta2",
        lo=delta_range[0],
        hi=delta_range[1],
        steps=steps,
        incident=INCIDENTS[index % 3],
        k=BEAM_SPLITTER_K,
        k_channel="a",
        derived_rules=rules,
        bindings=_design_binding(design),
        name=f"fig9{panel}",
    )


def _tunable_k_sweep(panel: str, steps: int, delta_range) -> SweepSpec:
    index = PANELS.index(panel)
    incident = INCIDENTS[index % 3]
    design = design_circulator_three_modes_at_k(0.1 * math.pi if index < 3 else 0.2 * math.pi)
    return SweepSpec(
        node=design.to_node(),
        channels=design.channels(),
        variable="k",
        lo=K_RANGE[0],
        hi=K_RANGE[1],
        steps=steps,
        incident=incident,
        k_channel=incident,
        bindings=_design_binding(design),
        name=f"fig10{panel}",
    )


FIGURE_FAMILIES: Dict[str, Tuple[str, Callable]] = {
    "fig2": ("abcd", _converter_k_sweep),
    "fig3": ("abcd", _converter_detuning_sweep),
    "fig5": (PANELS, _two_mode_k_sweep),
    "fig6": (PANELS, _two_mode_detuning_sweep),
    "fig8": (PANELS, _three_mode_k_sweep),
    "fig9": (PANELS, _three_mode_detuning_sweep),
    "fig10": (PANELS, _tunable_k_sweep),
}

FIGURE_IDS: List[str] = [
    f"{family}{panel}" for family, (panels, _) in FIGURE_FAMILIES.items() for panel in panels
]


def reproduce_figure(
    figure_id: str,
    steps: Optional[int] = None,
    delta_range: Optional[Sequence[float]] = None,
) -> SweepSpec:
    """
    Sweep spec reproducing one published figure panel

    Args:
        figure_id: e.g. "fig2c", "fig6a", "fig10f"
        steps: Grid density (default 512)
        delta_range: Detuning axis for the detuning panels (default [-4, 4])

    Returns:
        SweepSpec carrying the caption's bindings and derived rules
    """
    if figure_id not in FIGURE_IDS:
        raise UnknownFigure(f"unknown figure id {figure_id!r}; known ids are fig2a..fig2d, fig3a..fig3d, "
                            f"fig5a..fig5f, fig6a..fig6f, fig8a..fig8f, fig9a..fig9f, fig10a..fig10f")
    family, panel = figure_id[:-1], figure_id[-1]
    _, build = FIGURE_FAMILIES[family]
    return build(panel, steps or DEFAULT_STEPS, tuple(delta_range or DEFAULT_DELTA_RANGE))
