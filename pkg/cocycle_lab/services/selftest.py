"""
Self-test battery
The invariant checks at reduced scale: cocycle identity, orbit cocycle oracle, kernel
normalisation, monitors on point masses, the Polya contrast and determinism.
"""
import logging
from typing import List, Tuple

import numpy as np

from cocycle_lab.schemas.cocycle import (
    CocycleSpec,
    ConstantBase,
    CoordinateReadBase,
    IndicatorMinusMeanBase,
    LatticeStepBase,
    OdometerOrbitBase,
)
from cocycle_lab.schemas.config import SelftestBlock
from cocycle_lab.schemas.reports import CheckOutcome, SuiteResult
from cocycle_lab.schemas.system import (
    GaussianMarginal,
    IidShiftSystem,
    LatticeUniformMarginal,
    MarkovShiftSystem,
    OdometerSystem,
    RotationSystem,
    UniformPm1Marginal,
)
from cocycle_lab.services.cocycle import Cocycle, build_cocycle, symmetrize
from cocycle_lab.services.diagnostics import recurrence_estimate
from cocycle_lab.services.empirics import EmpiricalMeasure, monitor_ladder
from cocycle_lab.services.gallery import orbit_cocycle_checks
from cocycle_lab.services.kernels import (
    autocorrelation_peak_check,
    kernel_normalization,
    triangle_kernel,
)
from cocycle_lab.services.suites import suite_result
from cocycle_lab.services.systems import sample_points
from cocycle_lab.utils.seeding import derive_seed
from cocycle_lab.utils.workers import WorkerPool, get_worker_pool

logger = logging.getLogger(__name__)

IDENTITY_OFFSETS = (-50, -7, 0, 3, 50)
FLOAT_IDENTITY_TOLERANCE = 1e-9
NORMALIZATION_TOLERANCE = 1e-9
KERNEL_DELTAS = (0.5, 0.1, 0.02)
POLYA_SEPARATION = 0.3
SE_GUARD = 3.0
DETERMINISM_SAMPLES = 256
DETERMINISM_HORIZON = 300


def shipped_models() -> List[Tuple[str, Cocycle]]:
    """One cocycle per system family the configs use"""
    markov = MarkovShiftSystem(transition=[[0.5, 0.5], [0.5, 0.5]], stationary=[0.5, 0.5])
    pair_system, pair_spec = symmetrize(RotationSystem(), CocycleSpec(base=IndicatorMinusMeanBase(beta=0.25)))
    gaussian = IidShiftSystem(marginal=GaussianMarginal(mean=[0.0, 0.0], covariance=[[1.0, 0.0], [0.0, 1.0]]))
    models = [
        ("rotation_indicator", RotationSystem(), CocycleSpec(base=IndicatorMinusMeanBase(beta=1 / 3))),
        ("pm1_walk", IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=CoordinateReadBase())),
        ("z2_walk", IidShiftSystem(marginal=LatticeUniformMarginal(d=2)), CocycleSpec(base=CoordinateReadBase())),
        ("gaussian_plane", gaussian, CocycleSpec(base=CoordinateReadBase())),
        ("markov_steps", markov, CocycleSpec(base=LatticeStepBase(steps=[[1.0], [-1.0]]))),
        ("odometer_orbit", OdometerSystem(q=3), CocycleSpec(base=OdometerOrbitBase())),
        ("symmetrized_rotation", pair_system, pair_spec),
    ]
    return [(name, build_cocycle(system, spec)) for name, system, spec in models]


def identity_checks(block: SelftestBlock, seed: int) -> List[CheckOutcome]:
    checks = []
    for name, cocycle in shipped_models():
        points = sample_points(cocycle.system, derive_seed(seed, "identity", name), range(block.identity_points))
        defect = max(
            cocycle.identity_defect(x, m, n) for x in points for m in IDENTITY_OFFSETS for n in IDENTITY_OFFSETS
        )
        bound = 0.0 if cocycle.integer_valued else FLOAT_IDENTITY_TOLERANCE
        checks.append(
            CheckOutcome(name=f"cocycle_identity_{name}", passed=defect <= bound, value=defect, bound=bound)
        )
    return checks


def kernel_checks(seed: int) -> List[CheckOutcome]:
    checks = []
    for d, deltas in ((1, KERNEL_DELTAS), (2, (0.5,))):
        for delta in deltas:
            total = kernel_normalization(delta, d, nodes=2001)
            checks.append(
                CheckOutcome(
                    name=f"kernel_integral_d{d}_delta{delta:g}",
                    passed=abs(total - 1.0) <= NORMALIZATION_TOLERANCE,
                    value=total,
                    bound=1.0,
                )
            )
    rng = np.random.default_rng(derive_seed(seed, "kernel points"))
    z = rng.uniform(-1.0, 1.0, size=(10**4, 2))
    delta = 0.5
    envelope = np.where(np.abs(z).max(axis=1) < delta, delta ** -2, 0.0)
    checks.append(
        CheckOutcome(
            name="kernel_envelope",
            passed=bool(np.all(triangle_kernel(z, delta) <= envelope)),
            detail="g_delta <= delta^-d on the open box and 0 outside",
        )
    )
    measure = EmpiricalMeasure.uniform(rng.standard_cauchy(size=(200, 1)))
    peak = autocorrelation_peak_check(measure, 0.1, [[0.0], [0.05], [-0.05], [0.1], [0.3]], seed=seed)
    checks.append(CheckOutcome(name="autocorrelation_peak_at_zero", passed=peak.passed))
    return checks


def monitor_checks(seed: int) -> List[CheckOutcome]:
    zero = build_cocycle(IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=ConstantBase(value=[0.0])))
    drift = build_cocycle(IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=ConstantBase(value=[1.0])))
    at_zero = monitor_ladder(zero, 1, 10, 0.1, 1.0, 100, derive_seed(seed, "monitor", 0))
    drifting = monitor_ladder(drift, 1, 10, 0.5, 1.0, 100, derive_seed(seed, "monitor", 1))
    return [
        CheckOutcome(
            name="dyadic_ladder_exceeds_bounds_at_zero",
            passed=at_zero["dyadic_ladder"].recurrence_evidence,
            value=at_zero["dyadic_ladder"].observed,
        ),
        CheckOutcome(
            name="bounds_respected_under_drift",
            passed=not any(c.violated for report in drifting.values() for c in report.cells),
            value=max(report.observed for report in drifting.values()),
        ),
    ]


def polya_check(block: SelftestBlock, seed: int) -> CheckOutcome:
    fractions = []
    errors = []
    for d in (2, 3):
        walk = build_cocycle(IidShiftSystem(marginal=LatticeUniformMarginal(d=d)), CocycleSpec(base=CoordinateReadBase()))
        report = recurrence_estimate(walk, block.polya_horizon, [0.5], block.sample_count, derive_seed(seed, "polya", d))
        fractions.append(report.fractions[-1][0])
        errors.append(report.standard_error(block.polya_horizon, 0.5))
    gap = fractions[0] - fractions[1]
    return CheckOutcome(
        name="polya_contrast",
        passed=bool(gap + SE_GUARD * np.hypot(*errors) >= POLYA_SEPARATION),
        detail=f"Z^2 {fractions[0]:.3f} against Z^3 {fractions[1]:.3f} at N={block.polya_horizon}",
        value=gap,
        bound=POLYA_SEPARATION,
    )


def determinism_check(seed: int) -> CheckOutcome:
    walk = build_cocycle(IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=CoordinateReadBase()))
    pool = get_worker_pool()
    previous = pool.workers
    reports = []
    try:
        for workers in (1, 3):
            WorkerPool(workers)
            reports.append(
                recurrence_estimate(walk, DETERMINISM_HORIZON, [0.5], DETERMINISM_SAMPLES, derive_seed(seed, "determinism"))
            )
    finally:
        WorkerPool(previous)
    return CheckOutcome(
        name="worker_count_invariance",
        passed=reports[0].model_dump() == reports[1].model_dump(),
        detail="recurrence estimate with 1 and 3 workers",
    )


def run_selftest(block: SelftestBlock, seed: int = 0) -> SuiteResult:
    logger.info("🚀 Running the self-test battery")
    odometer = build_cocycle(OdometerSystem(q=3), CocycleSpec(base=OdometerOrbitBase()))
    orbit_points = sample_points(odometer.system, derive_seed(seed, "oracle"), range(block.oracle_points))
    checks = (
        identity_checks(block, seed)
        + orbit_cocycle_checks(odometer, orbit_points)
        + kernel_checks(seed)
        + monitor_checks(seed)
        + [polya_check(block, seed), determinism_check(seed)]
    )
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.error(f"❌ Self-test failures: {failed}")
    return suite_result("selftest", [], checks, None, {}, {"seed": seed, "sample_count": block.sample_count})
