"""
Scenario Manager - Load, validate and save scenario files
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from modules.core.errors import ConfigError, InvalidSpec
from modules.core.types import (
    TOPOLOGY_CHANNELS,
    TOPOLOGY_EDGES,
    TOPOLOGY_MODES,
    ChannelSpec,
    NodeSpec,
    Topology,
    arrange_channels,
)
from utils.angles import format_angle, parse_angle


class ChannelEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: Literal["a", "b", "c"]
    xi: float = Field(1.0, gt=0, allow_inf_nan=False)


class ModeEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: Literal["d1", "d2", "d3"]
    delta: float = Field(0.0, allow_inf_nan=False)
    gamma: float = Field(0.0, ge=0, allow_inf_nan=False)


class CouplingEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    channel: Literal["a", "b", "c"]
    mode: Literal["d1", "d2", "d3"]
    strength: float = Field(alias="J", ge=0, allow_inf_nan=False)


class ScenarioConfig(BaseModel):
    """Serialized scenario: one node plus its waveguides"""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    topology: Literal["two_port", "circ_two_modes", "circ_three_modes"]
    channels: List[ChannelEntry]
    modes: List[ModeEntry]
    couplings: List[CouplingEntry]
    phi: Union[float, str] = 0.0
    angle_unit: Literal["rad", "pi"] = "rad"


@dataclass(frozen=True)
class Scenario:
    name: str
    node: NodeSpec
    channels: Tuple[ChannelSpec, ...]
    source: Optional[str] = None


def _line_of(root: Optional[yaml.Node], loc: Sequence) -> Optional[int]:
    """1-based line of the deepest YAML node reachable along a validation loc"""
    node, line = root, None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            match = None
            for key_node, value_node in node.value:
                if key_node.value == key:
                    match = (key_node, value_node)
                    break
            if match is None:
                break
            line = match[0].start_mark.line + 1
            node = match[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _field_path(loc: Sequence) -> str:
    path = ""
    for key in loc:
        path += f"[{key}]" if isinstance(key, int) else (f".{key}" if path else str(key))
    return path


def _layout_error(config: ScenarioConfig) -> Optional[Tuple[tuple, str]]:
    """First structural problem as (validation loc, reason), or None"""
    topology = Topology(config.topology)

    def labelled(entries, field, allowed, kind):
        seen = set()
        for i, entry in enumerate(entries):
            if entry.label not in allowed:
                return (field, i, "label"), f"{topology.value} has no {kind} {entry.label}"
            if entry.label in seen:
                return (field, i, "label"), f"duplicate {kind}: {entry.label}"
            seen.add(entry.label)
        missing = [label for label in allowed if label not in seen]
        if missing:
            return (field,), f"{topology.value} needs {kind}s {list(allowed)}, missing {missing}"
        return None

    problem = labelled(config.channels, "channels", TOPOLOGY_CHANNELS[topology], "channel")
    problem = problem or labelled(config.modes, "modes", TOPOLOGY_MODES[topology], "mode")
    if problem:
        return problem

    if topology is not Topology.TWO_PORT:
        for j, mode in enumerate(config.modes):
            if mode.gamma != 0.0:
                return ("modes", j, "gamma"), "circulator topologies are dissipation-free"

    expected = TOPOLOGY_EDGES[topology]
    seen = set()
    for i, coupling in enumerate(config.couplings):
        edge = (coupling.channel, coupling.mode)
        if edge not in expected:
            return ("couplings", i), f"{topology.value} has no edge ({edge[0]},{edge[1]})"
        if edge in seen:
            return ("couplings", i), f"duplicate coupling edge: ({edge[0]},{edge[1]})"
        seen.add(edge)
    missing = [f"({c},{m})" for c, m in expected if (c, m) not in seen]
    if missing:
        return ("couplings",), f"{topology.value} is missing coupling edges {', '.join(missing)}"
    return None


class ScenarioManager:
    """Manages scenario files under config/scenarios"""

    def __init__(self, scenarios_dir: str = "config/scenarios"):
        self.scenarios_dir = Path(scenarios_dir)
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        logger = logging.getLogger("ScenarioManager")
        logger.setLevel(logging.INFO)
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        return logger

    def resolve(self, name_or_path: str) -> Path:
        """Accept a path, or a bare scenario name under the scenarios directory"""
        path = Path(name_or_path)
        if path.exists():
            return path
        for candidate in (self.scenarios_dir / name_or_path, self.scenarios_dir / f"{name_or_path}.yaml"):
            if candidate.exists():
                return candidate
        raise ConfigError("scenario file not found", path=str(name_or_path))

    def load_scenario(self, name_or_path: str) -> Scenario:
        """
        Load and validate a scenario file

        Args:
            name_or_path: File path or scenario name

        Returns:
            Scenario with a validated NodeSpec and channel list
        """
        path = self.resolve(name_or_path)
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
        return self.parse_scenario(text, source=str(path))

    def parse_scenario(self, text: str, source: str = "<scenario>") -> Scenario:
        try:
            root = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            problem = getattr(e, "problem", None) or str(e)
            raise ConfigError(f"invalid YAML: {problem}", path=source, line=line)

        if not isinstance(data, dict):
            raise ConfigError("scenario must be a mapping", path=source, line=1)

        try:
            config = ScenarioConfig.model_validate(data)
        except ValidationError as e:
            error = e.errors()[0]
            loc = tuple("J" if key == "strength" else key for key in error["loc"])
            raise ConfigError(error["msg"].lower(), path=source, line=_line_of(root, loc), field=_field_path(loc))

        problem = _layout_error(config)
        if problem:
            loc, reason = problem
            raise ConfigError(reason, path=source, line=_line_of(root, loc), field=_field_path(loc))

        try:
            phi = parse_angle(config.phi, config.angle_unit)
        except InvalidSpec as e:
            raise ConfigError(e.reason, path=source, line=_line_of(root, ("phi",)), field="phi")

        node = NodeSpec.from_couplings(
            Topology(config.topology),
            {(c.channel, c.mode): c.strength for c in config.couplings},
            phi,
            {m.label: m.delta for m in config.modes},
            {m.label: m.gamma for m in config.modes},
        )
        node_channels = arrange_channels(
            (ChannelSpec(c.label, c.xi) for c in config.channels), node.topology
        )

        name = config.name or Path(source).stem
        self.logger.debug(f"Loaded scenario {name} from {source}")
        return Scenario(name=name, node=node, channels=node_channels, source=source)

    def to_config(self, node: NodeSpec, channels: Sequence[ChannelSpec], name: Optional[str] = None) -> dict:
        """Serializable scenario mapping for a node and its channels"""
        return {
            "name": name or node.topology.value,
            "topology": node.topology.value,
            "channels": [{"label": c.label, "xi": c.xi} for c in channels],
            "modes": [{"label": m.label, "delta": m.delta, "gamma": m.gamma} for m in node.modes],
            "couplings": [{"channel": e.channel, "mode": e.mode, "J": e.strength} for e in node.edges],
            "phi": format_angle(node.phi),
            "angle_unit": "rad",
        }

    def save_scenario(self, node: NodeSpec, channels: Sequence[ChannelSpec], path: str, name: Optional[str] = None) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.to_config(node, channels, name), f, sort_keys=False)
        self.logger.info(f"Saved scenario: {target}")
        return target

    def list_scenarios(self) -> List[str]:
        if not self.scenarios_dir.exists():
            return []
        return sorted(p.stem for p in self.scenarios_dir.glob("*.yaml"))
