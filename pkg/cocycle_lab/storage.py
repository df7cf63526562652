"""
Run storage
One directory per run holding manifest.json, report.json, curves/*.csv and run.log.
"""
import logging
import platform
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import pydantic
import scipy

from cocycle_lab import __version__
from cocycle_lab.schemas.reports import DriftScanReport, RecurrenceReport, RunManifest
from cocycle_lab.utils.export import curve_frame, write_csv, write_json

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
MANIFEST_FILE = "manifest.json"
LOG_FILE = "run.log"
CURVES_DIR = "curves"


def library_versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


def run_directory_name(command: str, name: Optional[str] = None) -> str:
    return f"{command}-{name}" if name else command


class RunDirectory:
    """Single writer for the artifacts of one run"""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.curves: List[Path] = []

    @property
    def log_path(self) -> Path:
        return self.root / LOG_FILE

    @property
    def report_path(self) -> Path:
        return self.root / REPORT_FILE

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_FILE

    def write_report(self, payload: Any) -> Path:
        path = write_json(self.report_path, payload)
        logger.info(f"✅ Report written to {path}")
        return path

    def write_curve(self, name: str, frame: pd.DataFrame) -> Path:
        path = write_csv(self.root / CURVES_DIR / f"{name}.csv", frame)
        self.curves.append(path)
        logger.debug(f"📊 Curve {name} written ({len(frame)} rows)")
        return path

    def write_manifest(self, manifest: RunManifest) -> Path:
        return write_json(self.manifest_path, manifest)

    # curve helpers shared by the commands

    def write_recurrence_curve(self, name: str, report: RecurrenceReport) -> Path:
        columns: Dict[str, list] = {"horizon": report.horizons}
        for e, eps in enumerate(report.epsilons):
            columns[f"fraction_eps_{eps:g}"] = [row[e] for row in report.fractions]
        return self.write_curve(name, curve_frame(columns))

    def write_scan_curve(self, name: str, report: DriftScanReport) -> Path:
        dim = len(report.cells[0].c)
        columns: Dict[str, list] = {f"c{j}": [cell.c[j] for cell in report.cells] for j in range(dim)}
        columns["fraction"] = [cell.fraction for cell in report.cells]
        columns["standard_error"] = [cell.standard_error for cell in report.cells]
        columns["verdict"] = [cell.verdict for cell in report.cells]
        return self.write_curve(name, curve_frame(columns))

    def write_result_curves(self, reports: Dict[str, Any]) -> None:
        """A curve for every recurrence report and drift scan found in a suite's reports"""
        for key, payload in reports.items():
            if not isinstance(payload, dict):
                continue
            if "cells" in payload and "threshold" in payload:
                self.write_scan_curve(key, DriftScanReport.model_validate(payload))
            elif "first_near_return_times" in payload:
                self.write_recurrence_curve(key, RecurrenceReport.model_validate(payload))


def build_manifest(
    command: str,
    name: Optional[str],
    config_hash: str,
    workers: int,
    started_at: str,
    finished_at: str,
    wall_time: float,
    exit_code: int,
) -> RunManifest:
    return RunManifest(
        command=command,
        name=name,
        config_sha256=config_hash,
        package_version=__version__,
        versions=library_versions(),
        workers=workers,
        started_at=started_at,
        finished_at=finished_at,
        wall_time_seconds=wall_time,
        exit_code=exit_code,
    )
