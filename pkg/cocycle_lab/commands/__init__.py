from typing import Callable, Dict, Optional

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.storage import RunDirectory

from . import estimate, gallery, monitor, scan, selftest, suite

Command = Callable[[ExperimentConfig, Optional[str], RunDirectory], int]

COMMANDS: Dict[str, Command] = {
    "estimate": estimate.execute,
    "scan": scan.execute,
    "suite": suite.execute,
    "gallery": gallery.execute,
    "monitor": monitor.execute,
    "selftest": selftest.execute,
}

__all__ = ["COMMANDS", "Command"]
