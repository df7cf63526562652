"""
selftest command
Invariant battery at reduced scale; exit code 1 when any check fails.
"""
import logging
from typing import Optional

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.services.selftest import run_selftest
from cocycle_lab.storage import RunDirectory
from cocycle_lab.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def execute(config: ExperimentConfig, name: Optional[str], store: RunDirectory) -> int:
    result = run_selftest(config.selftest, derive_seed(config.master_seed, "selftest"))
    store.write_report({"command": "selftest", "result": result})
    failed = [c.name for c in result.conclusion_checks if not c.passed]
    if failed:
        print(f"❌ Self-test failed: {', '.join(failed)}")
        return 1
    print(f"✅ Self-test passed ({len(result.conclusion_checks)} checks)")
    return 0
