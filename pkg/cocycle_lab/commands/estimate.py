"""
estimate command
Near-return statistics of the configured cocycle at the estimate block's resolution.
"""
import logging
from typing import Optional

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.services.diagnostics import recurrence_estimate
from cocycle_lab.storage import RunDirectory
from cocycle_lab.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def execute(config: ExperimentConfig, name: Optional[str], store: RunDirectory) -> int:
    system, spec = config.require_model()
    cocycle = build_cocycle(system, spec, config.horizon_bound)
    block = config.estimate
    epsilons = block.epsilons or [cocycle.default_epsilon]
    report = recurrence_estimate(
        cocycle, block.horizon, epsilons, block.sample_count, derive_seed(config.master_seed, "estimate")
    )
    store.write_report({"command": "estimate", "system": system, "cocycle": spec, "recurrence": report})
    store.write_recurrence_curve("near_return_fraction", report)
    fractions = ", ".join(f"eps={e:g}: {f:.4f}" for e, f in zip(report.epsilons, report.fractions[-1]))
    print(f"✅ Near-return fraction at N={report.max_horizon}: {fractions}")
    return 0
