"""
Workflow Controller - Runs scattering queries, sweeps, designs and verification
"""

import copy
import json
import logging
import math
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import yaml

from controller.scenario_manager import ScenarioManager
from controller.state_store import StateStore
from modules.core.errors import ConservationViolation, InvalidSpec, ScatteringError
from modules.oracle.verification import closed_vs_boundary, conservation_suite, wavepacket_suite
from modules.oracle.wavepacket import LatticeScenario
from modules.sweep.backends import BACKENDS, evaluate
from modules.sweep.figures import FIGURE_IDS, reproduce_figure
from modules.sweep.grid import SWEEP_VARIABLES, SweepRunner, SweepSpec, audited_records, conservation_audit
from modules.threeport.design import (
    design_circulator_three_modes_at_k,
    design_circulator_three_modes_equal,
    design_circulator_two_modes,
)
from modules.twoport.design import optimal_converter_points
from utils.angles import display_angle, format_angle, parse_angle

DEFAULT_CONFIG = {
    "system": {
        "name": "CRW Scattering Engine",
        "version": "1.0.0",
        "output_dir": "output",
        "log_level": "INFO",
    },
    "sweep": {
        "threads": 0,
        "default_steps": 512,
        "delta_range": [-4.0, 4.0],
    },
    "verify": {
        "draws": 1000,
        "seed": 7,
        "oracle_tolerance": 1e-10,
        "conservation_tolerance": 1e-9,
        "wavepacket_tolerance": 0.02,
    },
    "wavepacket": {
        "sites_per_arm": 400,
        "packet_width": 20.0,
        "time_step": 0.02,
    },
}

VERIFY_SUITES = ("closed-vs-boundary", "conservation", "wavepacket")
DESIGN_TOPOLOGIES = ("circ1", "circ2-equal", "circ2-k")
ANGLE_VARIABLES = ("k", "phi")


def _merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _complex_pair(value: complex) -> Optional[List[float]]:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        return None
    return [value.real, value.imag]


class WorkflowController:
    """Main orchestrator for the scattering engine commands"""

    def __init__(self, config_path: str = "config/config.yaml", verbose: bool = False):
        self.config_path = config_path
        self.verbose = verbose
        self.config = self._load_config(config_path)
        self.logger = self._setup_logger()
        self.scenario_manager = ScenarioManager()
        self.state_store = StateStore(self.config["system"]["output_dir"])

    def _setup_logger(self) -> logging.Logger:
        """Setup logging configuration"""
        level = logging.DEBUG if self.verbose else getattr(
            logging, str(self.config["system"].get("log_level", "INFO")).upper(), logging.INFO
        )
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        logger = logging.getLogger("WorkflowController")
        logger.setLevel(level)
        if not logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(formatter)
            logger.addHandler(handler)

        # numeric modules log through the "modules" hierarchy
        modules_logger = logging.getLogger("modules")
        modules_logger.setLevel(level if self.verbose else logging.WARNING)
        if not modules_logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(formatter)
            modules_logger.addHandler(handler)
        return logger

    def _load_config(self, config_path: str) -> Dict:
        """Load config.yaml over the built-in defaults"""
        try:
            if not os.path.exists(config_path):
                return copy.deepcopy(DEFAULT_CONFIG)
            with open(config_path, 'r', encoding='utf-8') as f:
                loaded = yaml.safe_load(f) or {}
            return _merge(DEFAULT_CONFIG, loaded)
        except (OSError, yaml.YAMLError) as e:
            logging.getLogger("WorkflowController").warning(f"Could not read {config_path}: {e}; using defaults")
            return copy.deepcopy(DEFAULT_CONFIG)

    def _get_timestamp(self) -> str:
        return datetime.now().isoformat()

    # smatrix

    def cmd_smatrix(
        self,
        scenario: str,
        incident: str,
        k: str,
        angle_unit: str = "rad",
        backend: str = "closed",
    ) -> Dict:
        """
        Single-point scattering matrix

        Args:
            scenario: Scenario file path or name
            incident: Channel whose wavenumber is k
            k: Wavenumber (text, see utils.angles)
            angle_unit: "rad" or "pi" for plain numbers
            backend: "closed" or "boundary"

        Returns:
            Result dictionary with energy, statuses, amplitudes and flows
        """
        loaded = self.scenario_manager.load_scenario(scenario)
        wavenumber = parse_angle(k, angle_unit)
        self.logger.info(f"S-matrix for {loaded.name}: incident {incident}, k={format_angle(wavenumber)}")
        result = evaluate(loaded.node, loaded.channels, wavenumber, incident, backend)

        amplitudes, flows = {}, {}
        for i, out in enumerate(result.labels):
            for j, inc in enumerate(result.labels):
                amplitudes[f"s_{out}{inc}"] = _complex_pair(complex(result.amplitudes[i, j]))
        for name, value in result.flow_items():
            flows[name] = value if math.isfinite(value) else None

        return {
            "status": "success",
            "scenario": loaded.name,
            "incident": incident,
            "k": wavenumber,
            "backend": result.backend,
            "energy": result.energy,
            "channels": {label: result.status(label).describe() for label in result.labels},
            "amplitudes": amplitudes,
            "flows": flows,
            "conservation_residual": result.conservation_residual(),
            "timestamp": self._get_timestamp(),
        }

    # sweep

    def _parse_bound(self, variable: str, text: str, angle_unit: str) -> float:
        if variable in ANGLE_VARIABLES:
            return parse_angle(text, angle_unit)
        try:
            return float(text)
        except (TypeError, ValueError):
            raise InvalidSpec(f"sweep bound for {variable} must be a number, got {text!r}")

    def _runner(self) -> SweepRunner:
        return SweepRunner(self.config["sweep"].get("threads", 0))

    def cmd_sweep(
        self,
        scenario: str,
        var: str,
        lo: str,
        hi: str,
        out: str,
        steps: Optional[int] = None,
        fmt: str = "csv",
        incident: str = "all",
        k: Optional[str] = None,
        k_channel: str = "a",
        edge: Optional[str] = None,
        angle_unit: str = "rad",
        backend: str = "closed",
        log10: bool = False,
    ) -> Dict:
        """Sweep one variable of a scenario and write the dataset"""
        loaded = self.scenario_manager.load_scenario(scenario)
        edge_key = None
        if edge:
            parts = [part.strip() for part in edge.split(",")]
            if len(parts) != 2:
                raise InvalidSpec(f"edge must look like 'a,d2', got {edge!r}")
            edge_key = (parts[0], parts[1])

        spec = SweepSpec(
            node=loaded.node,
            channels=loaded.channels,
            variable=var,
            lo=self._parse_bound(var, lo, angle_unit),
            hi=self._parse_bound(var, hi, angle_unit),
            steps=self.config["sweep"]["default_steps"] if steps is None else steps,
            incident=incident,
            k=parse_angle(k, angle_unit) if k is not None else None,
            k_channel=k_channel,
            edge=edge_key,
            backend=backend,
            name=loaded.name,
        )
        records = self._runner().run(spec)
        path = self.state_store.save_sweep(records, spec, out, fmt, log10)
        skipped = sum(1 for r in records if r.skipped)
        audit = conservation_audit(records)
        self.logger.info(f"Wrote {len(records)} rows to {path}")
        if audit:
            raise ConservationViolation(
                f"conservation audit failed at {len(audit)} lossless points of {loaded.name} (first index {audit[0]})"
            )
        return {
            "status": "success",
            "scenario": loaded.name,
            "output": str(path),
            "rows": len(records),
            "skipped": skipped,
            "audit_failures": audit,
            "timestamp": self._get_timestamp(),
        }

    # design

    def cmd_design(
        self,
        topology: str,
        j2: float = 1.2,
        phi: str = "pi/2",
        k: Optional[str] = None,
        xi: float = 1.0,
        angle_unit: str = "rad",
        save: Optional[str] = None,
    ) -> Dict:
        """
        Perfect-circulator design

        Args:
            topology: circ1 (two-mode), circ2-equal or circ2-k (three-mode)
            j2: J_{a,2} = J_{b,2} for circ1
            phi: Synthetic phase
            k: Operating wavenumber (circ1: pi/4 or 3pi/4; circ2-k: required)
            xi: Hopping of CRW-a/b
            angle_unit: Unit of plain numbers in phi and k
            save: Write the first design as a scenario file
        """
        phase = parse_angle(phi, angle_unit)
        if topology == "circ1":
            wavenumber = parse_angle(k, angle_unit) if k is not None else 0.25 * math.pi
            designs = [design_circulator_two_modes(j2, phase, wavenumber, xi=xi)]
        elif topology == "circ2-equal":
            designs = list(design_circulator_three_modes_equal(phase, xi))
        elif topology == "circ2-k":
            if k is None:
                raise InvalidSpec("circ2-k needs --k")
            designs = [design_circulator_three_modes_at_k(parse_angle(k, angle_unit), phase, xi)]
        else:
            raise InvalidSpec(f"unknown design topology {topology!r}, expected one of {DESIGN_TOPOLOGIES}")

        entries = []
        for design in designs:
            entry = dict(design.summary())
            entry["direction"] = design.direction.value if design.direction else None
            entries.append(entry)
        if save:
            first = designs[0]
            self.scenario_manager.save_scenario(first.to_node(), first.channels(), save, name=topology)

        return {
            "status": "success",
            "topology": topology,
            "designs": entries,
            "saved": save,
            "timestamp": self._get_timestamp(),
        }

    # figures

    def _figure(self, figure_id: str, out_dir: Path, fmt: str, steps: Optional[int]) -> Dict:
        spec = reproduce_figure(
            figure_id,
            steps=steps or self.config["sweep"]["default_steps"],
            delta_range=self.config["sweep"]["delta_range"],
        )
        records = self._runner().run(spec)
        path = self.state_store.save_sweep(records, spec, str(out_dir / f"{figure_id}.{fmt}"), fmt)
        return {
            "id": figure_id,
            "output": str(path),
            "rows": len(records),
            "skipped": sum(1 for r in records if r.skipped),
            "audited": audited_records(records),
            "audit_failures": conservation_audit(records),
            "bindings": list(spec.bindings),
        }

    def cmd_figure(self, figure_id: str, out: str, fmt: str = "csv", steps: Optional[int] = None) -> Dict:
        """Regenerate one figure dataset, or every catalogued one with --id all"""
        out_dir = Path(out)
        ids = FIGURE_IDS if figure_id == "all" else [figure_id]
        figures = []
        for fid in ids:
            self.logger.info(f"Reproducing {fid}")
            figures.append(self._figure(fid, out_dir, fmt, steps))

        result = {
            "status": "success",
            "figures": figures,
            "timestamp": self._get_timestamp(),
        }
        if figure_id == "all":
            manifest = self.state_store.save_manifest(str(out_dir), {
                "figures": [
                    {key: f[key] for key in ("id", "rows", "skipped", "audited", "audit_failures")}
                    for f in figures
                ],
                "format": fmt,
            })
            result["manifest"] = str(manifest)
        failures = [f["id"] for f in figures if f["audit_failures"]]
        if failures:
            self.logger.error(f"Conservation audit failed for {failures}")
            raise ConservationViolation(f"conservation audit failed for {', '.join(failures)}")
        return result

    # verification

    def cmd_verify(self, suite: str, seed: Optional[int] = None, draws: Optional[int] = None) -> Dict:
        """Run one verification suite; status "failed" when any check misses its tolerance"""
        settings = self.config["verify"]
        seed = settings["seed"] if seed is None else seed
        draws = settings["draws"] if draws is None else draws
        rng = np.random.default_rng(seed)
        self.logger.info(f"Running {suite} verification (seed={seed}, draws={draws})")

        if suite == "closed-vs-boundary":
            checks = closed_vs_boundary(rng, draws, settings["oracle_tolerance"])
        elif suite == "conservation":
            checks = conservation_suite(rng, draws, settings["conservation_tolerance"])
        elif suite == "wavepacket":
            lattice = self.config["wavepacket"]
            scenario = LatticeScenario(
                sites_per_arm=int(lattice["sites_per_arm"]),
                packet_width=float(lattice["packet_width"]),
                time_step=float(lattice["time_step"]),
            )
            checks = wavepacket_suite(scenario, settings["wavepacket_tolerance"])
        else:
            raise InvalidSpec(f"unknown verification suite {suite!r}, expected one of {VERIFY_SUITES}")

        passed = all(check.passed for check in checks)
        for check in checks:
            log = self.logger.info if check.passed else self.logger.error
            log(f"{check.name}: residual {check.residual:.3e} (tolerance {check.tolerance:g})")
        return {
            "status": "success" if passed else "failed",
            "suite": suite,
            "seed": seed,
            "checks": [check.to_dict() for check in checks],
            "timestamp": self._get_timestamp(),
        }

    def cmd_points(self) -> Dict:
        """The four optimal converter operating points"""
        points = [
            {
                "phi": format_angle(p.phi),
                "k": format_angle(p.k),
                "dominant": p.dominant_flow,
                "label": p.label,
            }
            for p in optimal_converter_points()
        ]
        return {"status": "success", "points": points, "timestamp": self._get_timestamp()}


# text rendering

def _fmt(value: Optional[float]) -> str:
    return "nan" if value is None or not math.isfinite(value) else f"{value:.6f}"


def render_text(command: str, result: Dict) -> str:
    lines = []
    if command == "smatrix":
        lines.append(f"E={_fmt(result['energy'])}")
        for label, status in result["channels"].items():
            lines.append(f"{label}: {status}")
        for name, pair in result["amplitudes"].items():
            if pair is None:
                lines.append(f"{name}=nan")
            else:
                lines.append(f"{name}={pair[0]:.6f}{pair[1]:+.6f}i")
        for name, value in result["flows"].items():
            lines.append(f"{name}={_fmt(value)}")
        lines.append(f"conservation_residual={result['conservation_residual']:.3e}")
    elif command == "sweep":
        lines.append(f"wrote {result['rows']} rows to {result['output']} ({result['skipped']} skipped)")
    elif command == "design":
        for entry in result["designs"]:
            if result["topology"] == "circ1":
                lines.append(f"J_c2={entry['J_c2']:.6f}, xi_c={entry['xi_c']:.6f}")
            elif result["topology"] == "circ2-equal":
                lines.append(f"J={entry['J_a1']:.6f}, k={display_angle(entry['k'])}")
            else:
                lines.append(
                    f"J1={entry['J_a1']:.6f}, J2={entry['J_a2']:.6f}, J3={entry['J_c2']:.6f}, "
                    f"xi_c={entry['xi_c']:.6f}, k={display_angle(entry['k'])}"
                )
            if entry["direction"]:
                lines.append(f"  circulation: {entry['direction']}")
    elif command == "figure":
        for figure in result["figures"]:
            audit = "audit ok" if not figure["audit_failures"] else f"audit failed at {figure['audit_failures']}"
            if not figure["audited"]:
                audit = "damped, not audited"
            elif figure["audited"] < figure["rows"] and not figure["audit_failures"]:
                audit = f"audit ok on {figure['audited']} lossless rows"
            lines.append(f"{figure['id']}: {figure['rows']} rows -> {figure['output']} ({audit})")
        if "manifest" in result:
            lines.append(f"manifest: {result['manifest']}")
    elif command == "verify":
        for check in result["checks"]:
            mark = "PASS" if check["passed"] else "FAIL"
            lines.append(f"{mark} {check['name']}: residual={check['residual']:.3e} tol={check['tolerance']:g}")
    elif command == "points":
        for point in result["points"]:
            lines.append(f"phi={point['phi']}, k={point['k']}: {point['dominant']} dominant, {point['label']}")
    return "\n".join(lines)


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(description='Single-photon scattering in CRWs coupled by mechanical modes')
    parser.add_argument('--config', default='config/config.yaml', help='System configuration file')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--json', action='store_true', help='Print the result dictionary as JSON')
    sub = parser.add_subparsers(dest='command', required=True)

    smatrix = sub.add_parser('smatrix', help='S-matrix and flows at one energy')
    smatrix.add_argument('scenario', help='Scenario file or name')
    smatrix.add_argument('--incident', required=True, choices=['a', 'b', 'c'])
    smatrix.add_argument('--k', required=True, help='Wavenumber in the incident channel')
    smatrix.add_argument('--angle-unit', default='rad', choices=['rad', 'pi'])
    smatrix.add_argument('--backend', default='closed', choices=list(BACKENDS))

    sweep = sub.add_parser('sweep', help='Grid sweep written as CSV/JSON')
    sweep.add_argument('scenario', help='Scenario file or name')
    sweep.add_argument('--var', required=True, choices=list(SWEEP_VARIABLES))
    sweep.add_argument('--from', dest='lo', required=True)
    sweep.add_argument('--to', dest='hi', required=True)
    sweep.add_argument('--steps', type=int)
    sweep.add_argument('--out', required=True)
    sweep.add_argument('--format', dest='fmt', default='csv', choices=['csv', 'json'])
    sweep.add_argument('--incident', default='all', choices=['a', 'b', 'c', 'all'])
    sweep.add_argument('--k', help='Fixed wavenumber when not sweeping k')
    sweep.add_argument('--k-channel', default='a', choices=['a', 'b', 'c'])
    sweep.add_argument('--edge', help="Coupling edge for --var coupling, e.g. 'a,d2'")
    sweep.add_argument('--angle-unit', default='rad', choices=['rad', 'pi'])
    sweep.add_argument('--backend', default='closed', choices=list(BACKENDS))
    sweep.add_argument('--log10', action='store_true', help='Append log10 flow columns clamped at -16')

    design = sub.add_parser('design', help='Perfect-circulator design')
    design.add_argument('--topology', required=True, choices=list(DESIGN_TOPOLOGIES))
    design.add_argument('--j2', type=float, default=1.2)
    design.add_argument('--phi', default='pi/2')
    design.add_argument('--k')
    design.add_argument('--xi', type=float, default=1.0)
    design.add_argument('--angle-unit', default='rad', choices=['rad', 'pi'])
    design.add_argument('--save', help='Write the design as a scenario file')

    figure = sub.add_parser('figure', help='Regenerate figure datasets')
    figure.add_argument('--id', dest='figure_id', required=True, help="Figure id (fig2a..fig10f) or 'all'")
    figure.add_argument('--out', required=True, help='Output directory')
    figure.add_argument('--format', dest='fmt', default='csv', choices=['csv', 'json'])
    figure.add_argument('--steps', type=int)

    verify = sub.add_parser('verify', help='Run a verification suite')
    verify.add_argument('--suite', required=True, choices=list(VERIFY_SUITES))
    verify.add_argument('--seed', type=int)
    verify.add_argument('--draws', type=int)

    sub.add_parser('points', help='List the optimal converter operating points')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point"""
    args = build_parser().parse_args(argv)
    controller = WorkflowController(args.config, verbose=args.verbose)

    try:
        if args.command == 'smatrix':
            result = controller.cmd_smatrix(args.scenario, args.incident, args.k, args.angle_unit, args.backend)
        elif args.command == 'sweep':
            result = controller.cmd_sweep(
                args.scenario, args.var, args.lo, args.hi, args.out,
                steps=args.steps, fmt=args.fmt, incident=args.incident, k=args.k,
                k_channel=args.k_channel, edge=args.edge, angle_unit=args.angle_unit,
                backend=args.backend, log10=args.log10,
            )
        elif args.command == 'design':
            result = controller.cmd_design(
                args.topology, j2=args.j2, phi=args.phi, k=args.k, xi=args.xi,
                angle_unit=args.angle_unit, save=args.save,
            )
        elif args.command == 'figure':
            result = controller.cmd_figure(args.figure_id, args.out, args.fmt, args.steps)
        elif args.command == 'verify':
            result = controller.cmd_verify(args.suite, args.seed, args.draws)
        else:
            result = controller.cmd_points()
    except ScatteringError as e:
        print(f"error: {e.reason}", file=sys.stderr)
        return e.exit_code

    if args.json:
        print(json.dumps(result, indent=2))
    else:
        print(render_text(args.command, result))
    return 0 if result.get("status") == "success" else 1


if __name__ == '__main__':
    sys.exit(main())
