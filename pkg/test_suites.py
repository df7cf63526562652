#!/usr/bin/env python3
"""
Check suites, gallery entries and the self-test battery at reduced scale.
Acceptance-scale runs are marked slow.
"""
import numpy as np
import pytest

from cocycle_lab.schemas.cocycle import (
    AddCoboundary,
    CocycleSpec,
    ConstantBase,
    CoordinateReadBase,
    IndicatorMinusMeanBase,
    TrigOfRotation,
)
from cocycle_lab.schemas.config import DriftGrid, GalleryBlock, SelftestBlock, SuiteBlock
from cocycle_lab.schemas.system import (
    CauchyMarginal,
    GaussianMarginal,
    IidShiftSystem,
    LatticeUniformMarginal,
    RotationSystem,
)
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.services.diagnostics import drift_scan, recurrence_estimate
from cocycle_lab.services.gallery import (
    CAUCHY_THRESHOLD,
    GALLERY,
    GALLERY_ALIASES,
    ODOMETER_HORIZONS,
    canonical_gallery,
    run_gallery,
)
from cocycle_lab.services.selftest import run_selftest
from cocycle_lab.services.suites import SUITE_ALIASES, SUITES, candidate_grid, canonical_suite, run_suite, suite_result
from cocycle_lab.schemas.reports import CheckOutcome
from cocycle_lab.utils.errors import ConfigurationError


def _gaussian_walk(d):
    marginal = GaussianMarginal(mean=[0.0] * d, covariance=[[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)])
    return build_cocycle(IidShiftSystem(marginal=marginal), CocycleSpec(base=CoordinateReadBase()))


def test_suite_registry():
    assert sorted(SUITES) == sorted([
        "integrable_mean", "weak_law", "tight_sums", "planar_gaussian",
        "density_at_zero", "symmetrized_line", "symmetrized_space", "cohomology_invariance",
    ])
    with pytest.raises(ConfigurationError):
        run_suite("no_such_suite", None)


def test_cited_names_resolve_to_registered_entries():
    assert set(SUITE_ALIASES.values()) == set(SUITES)
    assert set(GALLERY_ALIASES.values()) == set(GALLERY)
    assert canonical_suite("theorem3") == "integrable_mean"
    assert canonical_suite("prop2_invariance") == "cohomology_invariance"
    assert canonical_suite("weak_law") == "weak_law"
    assert canonical_gallery("example8_5") == "odometer_orbit"
    with pytest.raises(ConfigurationError):
        canonical_suite("theorem99")


def test_status_rules():
    ok = CheckOutcome(name="ok", passed=True)
    bad = CheckOutcome(name="bad", passed=False)
    note = CheckOutcome(name="note", passed=False, informational=True)
    assert suite_result("s", [bad], [ok], None, {}, {}).status == "hypothesis_unmet"
    assert suite_result("s", [ok, note], [ok, note], None, {}, {}).status == "consistent"
    result = suite_result("s", [ok], [bad], None, {}, {})
    assert result.status == "inconsistent"
    assert result.inconsistent


def test_candidate_grid_is_centred_on_the_resolution():
    cells = candidate_grid(0.3333, 0.05)[:, 0].tolist()
    assert cells == [0.25, 0.3, 0.35, 0.4, 0.45]


def test_integrable_mean_with_a_constant_drift(pm1_walk):
    cocycle = build_cocycle(pm1_walk.system, CocycleSpec(base=ConstantBase(value=[1.0])))
    result = run_suite("integrable_mean", cocycle, SuiteBlock(horizon=200, sample_count=100), seed=1)
    assert result.status == "consistent"
    assert result.verdict == "transient"


def test_integrable_mean_with_a_centred_walk(pm1_walk):
    params = SuiteBlock(horizon=2000, sample_count=300, threshold=0.9)
    result = run_suite("integrable_mean", pm1_walk, params, seed=2)
    assert result.status == "consistent"
    assert result.verdict == "recurrent"


def test_weak_law_on_the_walk(pm1_walk):
    params = SuiteBlock(horizon=2000, sample_count=200, threshold=0.9, n_list=[100, 1000, 10000])
    result = run_suite("weak_law", pm1_walk, params, seed=3)
    assert result.status == "consistent"
    assert result.verdict == "recurrent"
    assert all(np.isfinite(result.reports["tails"]["standard_error"]))


def test_weak_law_errors_stay_finite_for_the_zero_cocycle(pm1_walk):
    zero = build_cocycle(pm1_walk.system, CocycleSpec(base=ConstantBase(value=[0.0])))
    params = SuiteBlock(horizon=100, sample_count=100, threshold=0.9, n_list=[10, 100, 1000])
    result = run_suite("weak_law", zero, params, seed=3)
    tails = result.reports["tails"]
    assert all(0.0 <= t < 1e-12 for t in tails["tail_mass"])
    assert all(np.isfinite(tails["standard_error"]))
    assert result.status == "consistent"
    assert result.verdict == "recurrent"


def test_weak_law_hypothesis_fails_for_cauchy_steps():
    cauchy = build_cocycle(IidShiftSystem(marginal=CauchyMarginal()), CocycleSpec(base=CoordinateReadBase()))
    params = SuiteBlock(horizon=200, sample_count=200, epsilon=0.1, n_list=[10, 100, 1000])
    result = run_suite("weak_law", cauchy, params, seed=4)
    assert result.status == "hypothesis_unmet"


def test_tight_sums_on_a_rotation_coboundary():
    spec = CocycleSpec(
        base=ConstantBase(value=[0.0]),
        modifiers=[AddCoboundary(b=TrigOfRotation(amplitude=0.5))],
    )
    cocycle = build_cocycle(RotationSystem(), spec)
    params = SuiteBlock(horizon=2000, epsilon=0.05, sample_count=100, n_list=[10, 100, 1000], K=2.0)
    result = run_suite("tight_sums", cocycle, params, seed=5)
    assert result.status == "consistent"
    assert result.verdict == "recurrent"
    assert abs(result.reports["median"]["candidate_drift"]) < 0.05


def test_planar_gaussian_at_reduced_scale():
    params = SuiteBlock(
        horizon=500, epsilon=1.0, sample_count=400, threshold=0.2, ks_tolerance=0.1, companion_sample_count=100
    )
    result = run_suite("planar_gaussian", _gaussian_walk(2), params, seed=6)
    assert result.status == "consistent"
    assert result.verdict == "recurrent"
    contrast = next(c for c in result.conclusion_checks if c.name == "polya_contrast")
    assert contrast.informational


def test_planar_gaussian_needs_the_plane(pm1_walk):
    with pytest.raises(ConfigurationError):
        run_suite("planar_gaussian", pm1_walk, SuiteBlock(horizon=100, sample_count=100))


def test_density_at_zero_for_gaussian_steps():
    params = SuiteBlock(
        horizon=500, epsilon=0.5, sample_count=2000, threshold=0.8,
        n_list=[10, 100], eta_grid=[1.0, 0.5, 0.25],
    )
    result = run_suite("density_at_zero", _gaussian_walk(1), params, seed=7)
    assert result.status == "consistent"
    density = result.reports["density"]
    assert density["liminf_ratio"] > 0.5


def test_symmetrized_line_on_the_rotation_indicator(rotation_indicator):
    params = SuiteBlock(
        horizon=2000, epsilon=0.05, sample_count=500, threshold=0.9, n_list=[100, 1000],
        convolution_samples=2000, grid=DriftGrid(points=[[1 / 3]]),
    )
    result = run_suite("symmetrized_line", rotation_indicator, params, seed=8)
    assert result.status == "consistent"
    assert result.verdict == "recurrent"
    assert result.reports["floor"]["status"] == "consistent"
    assert abs(result.reports["median"]["candidate_drift"] - 1 / 3) < 0.01


def test_symmetrized_space_on_the_planar_walk(z2_walk):
    params = SuiteBlock(
        horizon=2000, epsilon=0.5, sample_count=500, threshold=0.4, n_list=[100, 1000],
        k_range=[0, 1, 2, 3, 4], convolution_samples=2000,
    )
    result = run_suite("symmetrized_space", z2_walk, params, seed=9)
    assert result.status == "consistent"
    assert result.reports["floor"]["status"] in ("consistent", "precondition_failed")


def test_cohomology_invariance_on_the_walk(pm1_walk):
    params = SuiteBlock(
        horizon=2000, epsilon=0.5, sample_count=200, threshold=0.9,
        grid=DriftGrid(points=[[0.0], [0.5], [1.0]]),
    )
    result = run_suite("cohomology_invariance", pm1_walk, params, seed=10)
    names = {c.name: c.passed for c in result.conclusion_checks}
    assert names["sandwich_perturbed_dominates"]
    assert names["sandwich_original_dominates"]
    assert result.resolution["coboundary_bound"] == 1.0
    assert result.status == "consistent"


def test_sandwich_holds_on_common_orbits(rotation_indicator):
    b = TrigOfRotation(amplitude=0.2)
    perturbed = rotation_indicator.with_modifier(AddCoboundary(b=b))
    eps = [0.05, 0.05 + 0.4 + 1e-9]
    base = recurrence_estimate(rotation_indicator, 500, eps, 100, seed=3)
    moved = recurrence_estimate(perturbed, 500, eps, 100, seed=3)
    for N in base.horizons:
        assert moved.near_return_fraction(N, eps[1]) >= base.near_return_fraction(N, eps[0])
        assert base.near_return_fraction(N, eps[1]) >= moved.near_return_fraction(N, eps[0])


def test_gallery_odometer_orbit_at_reduced_scale():
    params = GalleryBlock(horizon=500, sample_count=100, grid=DriftGrid(low=[-1.0], high=[1.0], step=0.5))
    result = run_gallery("odometer_orbit", params, seed=1)
    assert all(c.passed for c in result.hypothesis_checks)
    assert result.status == "consistent"
    assert result.reports["landscape"]["flagged"] + result.reports["landscape"]["not_flagged"] == 5


def test_gallery_infinite_mean_flags_nothing():
    params = GalleryBlock(horizon=1000, sample_count=100)
    result = run_gallery("infinite_mean", params, seed=2)
    assert result.reports["landscape"]["flagged"] == 0
    check = next(c for c in result.conclusion_checks if c.name == "nothing_flagged")
    assert check.passed and not check.informational
    assert check.value < check.bound == 0.95
    assert result.status == "consistent"


def test_cauchy_walk_is_inconsistent_at_an_unreachable_threshold():
    grid = DriftGrid(points=[[0.0]])
    params = GalleryBlock(horizon=100, sample_count=100, threshold=0.9, grid=grid)
    result = run_gallery("example8_3", params, seed=4)
    check = next(c for c in result.conclusion_checks if c.name == "everything_flagged")
    assert not check.informational
    assert check.value < 0.9
    assert result.status == "inconsistent"
    assert result.resolution["threshold"] == 0.9


def test_odometer_orbit_profiles_record_their_horizon():
    assert GalleryBlock().profile == "full"
    assert ODOMETER_HORIZONS == {"full": 10**6, "fast": 10**4}
    grid = DriftGrid(low=[-1.0], high=[1.0], step=0.5)
    result = run_gallery("odometer_orbit", GalleryBlock(profile="fast", sample_count=100, grid=grid), seed=1)
    assert result.resolution["horizon"] == 10**4
    assert result.resolution["profile"] == "fast"
    assert result.status == "consistent"


def test_gallery_rejects_unknown_names():
    with pytest.raises(ConfigurationError):
        run_gallery("example_nine")


def test_selftest_battery_at_reduced_scale():
    block = SelftestBlock(sample_count=100, identity_points=5, oracle_points=20, polya_horizon=500)
    result = run_selftest(block, seed=0)
    failed = [c.name for c in result.conclusion_checks if not c.passed and c.name != "polya_contrast"]
    assert failed == []
    assert any(c.name == "worker_count_invariance" for c in result.conclusion_checks)


# Acceptance scale

@pytest.mark.slow
def test_planar_and_spatial_walks_separate():
    fractions = {}
    for d in (2, 3):
        walk = build_cocycle(IidShiftSystem(marginal=LatticeUniformMarginal(d=d)), CocycleSpec(base=CoordinateReadBase()))
        fractions[d] = recurrence_estimate(walk, 10**4, [0.5], 1000, seed=d).fractions[-1][0]
    assert fractions[3] <= 0.45
    assert fractions[2] - fractions[3] >= 0.3


@pytest.mark.slow
def test_walk_on_the_line_returns_by_ten_thousand(pm1_walk):
    report = recurrence_estimate(pm1_walk, 10**4, [0.5], 1000, seed=11)
    assert report.fractions[-1][0] >= 0.97


@pytest.mark.slow
def test_integrable_drift_scan_flags_the_integral(rotation_indicator):
    grid = DriftGrid(low=[0.0], high=[1.0], step=0.05)
    scan = drift_scan(rotation_indicator, grid, 10**5, 0.05, 1000, seed=12)
    assert scan.flagged()
    assert all(abs(c[0] - 1 / 3) <= 0.05 + 1e-9 for c in scan.flagged())


@pytest.mark.slow
def test_cauchy_walk_flags_every_cell_at_its_threshold():
    result = run_gallery("cauchy_walk", None, seed=13)
    threshold = result.resolution["threshold"]
    assert threshold == CAUCHY_THRESHOLD
    assert all(cell["fraction"] >= threshold for cell in result.reports["scan"]["cells"])
    assert result.reports["landscape"]["flagged"] == 5
    assert result.status == "consistent"


@pytest.mark.slow
def test_selftest_battery_full_scale():
    result = run_selftest(SelftestBlock(), seed=0)
    assert result.status == "consistent"


@pytest.mark.slow
def test_zero_mean_rotation_indicator_is_recurrent():
    cocycle = build_cocycle(RotationSystem(), CocycleSpec(base=IndicatorMinusMeanBase(beta=1 / 3)))
    result = run_suite("integrable_mean", cocycle, None, seed=14)
    assert result.verdict == "recurrent"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
