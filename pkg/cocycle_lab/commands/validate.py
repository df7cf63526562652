"""
validate command
Checks a config without running it: schema errors, system/cocycle compatibility and
settings too weak for the statistics they feed.
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError
from scipy import stats

from cocycle_lab.schemas.config import ExperimentConfig
from cocycle_lab.schemas.reports import ValidationReport
from cocycle_lab.services.cocycle import Cocycle, build_cocycle
from cocycle_lab.services.empirics import RELIABLE_BALL_COUNT, ball_volume
from cocycle_lab.services.suites import suite_parameters
from cocycle_lab.settings import apply_overrides, read_config_tree, validation_messages
from cocycle_lab.storage import RunDirectory
from cocycle_lab.utils.errors import LabError

logger = logging.getLogger(__name__)

# density of a standard normal at its centre, per axis
REFERENCE_DENSITY = float(stats.norm.pdf(0.0))


def expected_ball_count(sample_count: int, eta: float, dim: int) -> float:
    """Samples expected in B(eta) for a unit-scale law with a Gaussian-like peak"""
    return sample_count * ball_volume(eta, dim) * REFERENCE_DENSITY ** dim


def power_warnings(config: ExperimentConfig, cocycle: Cocycle) -> List[str]:
    warnings = []
    d = cocycle.dim
    suite = suite_parameters(cocycle, config.suite)
    eta_min = min(suite.eta_grid)
    count = expected_ball_count(suite.sample_count, eta_min, d)
    if count < RELIABLE_BALL_COUNT:
        warnings.append(
            f"suite.eta_grid reaches eta={eta_min:g}, below the sample-supported resolution: about "
            f"{count:.1f} of {suite.sample_count} samples expected in the ball (need {RELIABLE_BALL_COUNT})"
        )
    if suite.pair_budget < suite.sample_count ** 2:
        warnings.append(
            f"suite.pair_budget={suite.pair_budget} < sample_count^2; kernel autocorrelations are sampled, not exact"
        )
    monitor = config.monitor
    if monitor.pair_budget < monitor.sample_count ** 2:
        warnings.append(
            f"monitor.pair_budget={monitor.pair_budget} < sample_count^2; kernel autocorrelations are sampled"
        )
    top = monitor.base_horizon * 2 ** monitor.ladder_depth
    if top > config.horizon_bound:
        warnings.append(f"monitor ladder reaches n={top}, past horizon_bound={config.horizon_bound}")
    for block_name in ("estimate", "scan"):
        horizon = getattr(config, block_name).horizon
        if horizon > config.horizon_bound:
            warnings.append(f"{block_name}.horizon={horizon} is past horizon_bound={config.horizon_bound}")
    if not cocycle.integer_valued and config.estimate.epsilons and min(config.estimate.epsilons) < 1e-3:
        warnings.append("estimate.epsilons below 1e-3 need very long horizons for a real-valued cocycle")
    return warnings


def validate(config_path: Optional[Path], overrides: Sequence[str] = ()) -> ValidationReport:
    """All type invariants as errors, underpowered settings as warnings"""
    report = ValidationReport(config_path=str(config_path) if config_path else None)
    try:
        tree = apply_overrides(read_config_tree(config_path), overrides)
        config = ExperimentConfig.model_validate(tree)
    except ValidationError as e:
        report.errors.extend(validation_messages(e))
        return report
    except LabError as e:
        report.errors.append(str(e))
        return report
    if config.system is None or config.cocycle is None:
        report.warnings.append("no system/cocycle section; only gallery and selftest can run this config")
        return report
    try:
        cocycle = build_cocycle(config.system, config.cocycle, config.horizon_bound)
    except LabError as e:
        report.errors.append(f"cocycle: {e}")
        return report
    report.warnings.extend(power_warnings(config, cocycle))
    return report


def execute_validate(config_path: Optional[Path], overrides: Sequence[str], store: RunDirectory) -> int:
    report = validate(config_path, overrides)
    store.write_report({"command": "validate", "validation": report})
    for message in report.errors:
        print(f"❌ {message}")
    for message in report.warnings:
        print(f"⚠️ {message}")
    if report.ok:
        print(f"✅ Config valid ({len(report.warnings)} warning(s))")
        return 0
    return 2
