"""
gallery command
Descriptive recurrence-set scans for the built-in examples.
"""
import logging
from typing import Optional

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.services.gallery import GALLERY, canonical_gallery, run_gallery
from cocycle_lab.storage import RunDirectory
from cocycle_lab.utils.errors import ConfigurationError
from cocycle_lab.utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def execute(config: ExperimentConfig, name: Optional[str], store: RunDirectory) -> int:
    if not name:
        raise ConfigurationError(f"gallery needs a name: {', '.join(sorted(GALLERY))}")
    name = canonical_gallery(name)
    result = run_gallery(name, config.gallery, derive_seed(config.master_seed, "gallery", name))
    store.write_report({"command": "gallery", "result": result})
    store.write_result_curves(result.reports)
    landscape = result.reports.get("landscape", {})
    print(f"✅ Gallery {name}: {landscape.get('flagged', 0)} flagged, {landscape.get('not_flagged', 0)} not flagged")
    return 0
