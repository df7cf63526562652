"""
suite command
Runs one named check suite on the configured cocycle. An inconsistent suite is a
finding recorded in the report, not a failed run.
"""
import logging
from typing import Optional

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.services.suites import SUITES, canonical_suite, run_suite
from cocycle_lab.storage import RunDirectory
from cocycle_lab.utils.errors import ConfigurationError
from cocycle_lab.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def execute(config: ExperimentConfig, name: Optional[str], store: RunDirectory) -> int:
    if not name:
        raise ConfigurationError(f"suite needs a name: {', '.join(sorted(SUITES))}")
    name = canonical_suite(name)
    system, spec = config.require_model()
    cocycle = build_cocycle(system, spec, config.horizon_bound)
    result = run_suite(name, cocycle, config.suite, derive_seed(config.master_seed, "suite", name))
    store.write_report({"command": "suite", "system": system, "cocycle": spec, "result": result})
    store.write_result_curves(result.reports)
    if result.inconsistent:
        print(f"⚠️ Suite {name}: inconsistent at stated power (verdict {result.verdict})")
    else:
        print(f"✅ Suite {name}: {result.status} (verdict {result.verdict})")
    return 0
