"""
State Store - Writes sweep datasets (CSV/JSON) and run manifests atomically
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from modules.core.errors import InvalidSpec
from modules.sweep.grid import SweepRecord, SweepSpec, flow_columns

LOG_FLOOR = -16.0


def _number(value: float) -> str:
    """12 significant digits"""
    return f"{value:.12g}"


def _log10(value: float) -> float:
    if not math.isfinite(value):
        return float("nan")
    if value <= 0.0:
        return LOG_FLOOR
    return max(math.log10(value), LOG_FLOOR)


def _json_number(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


class StateStore:
    """Persists sweep results and run manifests"""

    def __init__(self, output_dir: str = "output"):
        self.output_dir = Path(output_dir)
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        logger = logging.getLogger("StateStore")
        logger.setLevel(logging.INFO)
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            handler.setFormatter(formatter)
            logger.addHandler(handler)
        return logger

    def _atomic_write(self, path: Path, text: str) -> Path:
        """Write to a temp file beside the target, then rename over it"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=str(path.parent))
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
            os.replace(temp_name, path)
        except BaseException:
            if os.path.exists(temp_name):
                os.unlink(temp_name)
            raise
        return path

    def csv_header(self, labels: Sequence[str], log10: bool = False) -> List[str]:
        flows = flow_columns(labels)
        header = ["var", "value", "status", "E"] + flows + ["conservation_residual"]
        if log10:
            header += [f"log10_{name}" for name in flows]
        return header

    def render_csv(self, records: Sequence[SweepRecord], spec: SweepSpec, log10: bool = False) -> str:
        labels = spec.node.channel_labels
        variable = spec.describe()["variable"]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.csv_header(labels, log10))
        for record in records:
            flows = [float(record.flows[i, j]) for i in range(len(labels)) for j in range(len(labels))]
            row = [variable, _number(record.value), record.status, _number(record.energy)]
            row += [_number(value) for value in flows]
            row.append(_number(record.conservation_residual))
            if log10:
                row += [_number(_log10(value)) for value in flows]
            writer.writerow(row)
        return buffer.getvalue()

    def render_json(self, records: Sequence[SweepRecord], spec: SweepSpec) -> str:
        labels = spec.node.channel_labels
        rows = []
        for record in records:
            flows, amplitudes = {}, {}
            for i, out in enumerate(labels):
                for j, inc in enumerate(labels):
                    flows[f"I_{out}{inc}"] = _json_number(record.flows[i, j])
                    s = complex(record.amplitudes[i, j])
                    amplitudes[f"s_{out}{inc}"] = (
                        [s.real, s.imag] if math.isfinite(s.real) and math.isfinite(s.imag) else None
                    )
            rows.append({
                "index": record.index,
                "value": record.value,
                "status": record.status,
                "reason": record.reason,
                "E": record.energy,
                "statuses": list(record.statuses),
                "flows": flows,
                "amplitudes": amplitudes,
                "conservation_residual": _json_number(record.conservation_residual),
            })
        payload = {
            "spec": spec.describe(),
            "records": rows,
            "saved_at": datetime.now().isoformat(),
        }
        return json.dumps(payload, indent=2, ensure_ascii=False)

    def save_sweep(
        self,
        records: Sequence[SweepRecord],
        spec: SweepSpec,
        path: str,
        fmt: str = "csv",
        log10: bool = False,
    ) -> Path:
        """
        Save sweep records

        Args:
            records: Records in grid order
            spec: The sweep that produced them
            path: Target file
            fmt: "csv" or "json"
            log10: Append log10 flow columns (CSV only)

        Returns:
            Path of the written file
        """
        if fmt == "csv":
            text = self.render_csv(records, spec, log10)
        elif fmt == "json":
            text = self.render_json(records, spec)
        else:
            raise InvalidSpec(f"unknown output format {fmt!r}, expected csv or json")
        target = self._atomic_write(Path(path), text)
        self.logger.debug(f"Saved {len(records)} {spec.name} records to {target}")
        return target

    def save_manifest(self, directory: str, entries: Dict) -> Path:
        """Write manifest.json for a figure run"""
        manifest = dict(entries)
        manifest["saved_at"] = datetime.now().isoformat()
        target = self._atomic_write(
            Path(directory) / "manifest.json", json.dumps(manifest, indent=2, ensure_ascii=False)
        )
        self.logger.info(f"Saved manifest: {target}")
        return target

    def load_manifest(self, directory: str) -> Optional[Dict]:
        manifest_file = Path(directory) / "manifest.json"
        if not manifest_file.exists():
            return None
        with open(manifest_file, 'r', encoding='utf-8') as f:
            return json.load(f)
