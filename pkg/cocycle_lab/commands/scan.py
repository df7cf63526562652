"""
scan command
Drift scan of the configured cocycle over the scan block's grid.
"""
import logging
from typing import Optional

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.services.diagnostics import drift_scan
from cocycle_lab.storage import RunDirectory
from cocycle_lab.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def execute(config: ExperimentConfig, name: Optional[str], store: RunDirectory) -> int:
    system, spec = config.require_model()
    cocycle = build_cocycle(system, spec, config.horizon_bound)
    block = config.scan
    epsilon = block.epsilon or cocycle.default_epsilon
    report = drift_scan(
        cocycle,
        block.grid,
        block.horizon,
        epsilon,
        block.sample_count,
        derive_seed(config.master_seed, "scan"),
        block.threshold,
    )
    store.write_report({"command": "scan", "system": system, "cocycle": spec, "scan": report})
    store.write_scan_curve("verdicts", report)
    print(f"✅ {len(report.flagged())} of {len(report.cells)} cell(s) recurrent at resolution "
          f"(N={report.horizon}, eps={report.epsilon:g}, threshold={report.threshold:g})")
    return 0
