#!/usr/bin/env python3
"""
Tests for empirical sum distributions, ball masses, tightness, density at zero and the monitors
"""
import numpy as np
import pytest
from scipy import stats

from cocycle_lab.schemas.cocycle import CocycleSpec, ConstantBase, CoordinateReadBase
from cocycle_lab.schemas.system import CauchyMarginal, GaussianMarginal, IidShiftSystem, UniformPm1Marginal
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.services.empirics import (
    EmpiricalMeasure,
    average_distributions,
    convolve,
    density_at_zero,
    monitor_average_ball_bound,
    monitor_dyadic_ladder_bound,
    monitor_ladder,
    reflect,
    streamed_tau_table,
    sum_distribution,
    sum_distribution_ladder,
    tightness_check,
    tightness_grid,
)
from cocycle_lab.utils.errors import ConfigurationError, InsufficientDataError


def _constant(value):
    return build_cocycle(IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=ConstantBase(value=[value])))


def test_ball_masses_open_and_closed():
    measure = EmpiricalMeasure.uniform([[-1.0], [0.0], [0.5], [2.0]])
    assert measure.ball_mass(0.5) == 0.25
    assert measure.closed_ball_mass(0.5) == 0.5
    assert measure.closed_ball_mass(1.0) == 0.75
    assert measure.atom_at_zero() == 0.25
    with pytest.raises(ConfigurationError):
        measure.ball_mass(0.0)


def test_ball_mass_uses_the_max_norm():
    measure = EmpiricalMeasure.uniform([[0.9, -0.9], [0.2, 1.5]])
    assert measure.ball_mass(1.0) == 0.5


def test_non_finite_samples_become_overflow_mass():
    measure = EmpiricalMeasure.uniform([[0.0], [np.inf], [1.0], [np.nan]])
    assert measure.overflow_mass == 0.5
    assert measure.total_mass == 0.5
    assert measure.sample_count == 2


def test_mass_above_one_is_rejected():
    with pytest.raises(ConfigurationError):
        EmpiricalMeasure(np.zeros((2, 1)), np.array([0.7, 0.7]))


def test_sum_distribution_normalisation(pm1_walk):
    raw = sum_distribution(pm1_walk, 64, 0.0, 200, seed=1)
    averaged = sum_distribution(pm1_walk, 64, 1.0, 200, seed=1)
    assert np.allclose(raw.samples / 64, averaged.samples)
    assert raw.provenance.n == 64
    # partial sums of a +-1 walk keep the parity of n
    assert np.all(raw.samples % 2 == 0)


def test_ladder_reuses_the_same_orbits(pm1_walk):
    ladder = sum_distribution_ladder(pm1_walk, [10, 100], 0.5, 300, seed=4)
    single = sum_distribution(pm1_walk, 100, 0.5, 300, seed=4)
    assert np.array_equal(ladder[1].samples, single.samples)
    with pytest.raises(ConfigurationError):
        sum_distribution_ladder(pm1_walk, [100, 10], 0.5, 300, seed=4)


def test_worker_count_does_not_change_samples(pm1_walk):
    from cocycle_lab.utils.workers import WorkerPool

    first = sum_distribution(pm1_walk, 50, 0.0, 700, seed=9)
    WorkerPool(4)
    second = sum_distribution(pm1_walk, 50, 0.0, 700, seed=9)
    assert np.array_equal(first.samples, second.samples)


def test_reflect_and_convolve():
    measure = EmpiricalMeasure.uniform([[1.0], [3.0]])
    assert np.array_equal(reflect(measure).samples, -measure.samples)
    tilde = convolve(measure, reflect(measure), 4000, seed=0)
    assert set(np.unique(tilde.samples)) <= {-2.0, 0.0, 2.0}
    assert abs(tilde.atom_at_zero() - 0.5) < 0.05
    assert abs(tilde.total_mass - 1.0) < 1e-12


def test_averaged_measure_is_the_mean_of_components():
    a = EmpiricalMeasure.uniform([[0.0], [2.0]])
    b = EmpiricalMeasure.uniform([[0.0], [0.1]])
    tau = average_distributions([a, b])
    assert tau.ball_mass(0.5) == pytest.approx(0.75)


def test_tightness_reports_the_worst_horizon(pm1_walk):
    measures = sum_distribution_ladder(pm1_walk, [10, 1000], 0.0, 400, seed=2)
    report = tightness_check(measures, K=3.0, epsilon=0.5)
    assert not report.passed
    assert report.worst_n == 1000
    averaged = sum_distribution_ladder(pm1_walk, [10, 1000], 1.0, 400, seed=2)
    assert tightness_check(averaged, K=1.0, epsilon=0.9).passed
    grid = tightness_grid(measures, [3.0, 200.0], [0.5])
    assert grid.passed == [[False], [True]]
    assert grid.any_passed


def test_density_at_zero_flags_thin_balls():
    rng = np.random.default_rng(0)
    measure = EmpiricalMeasure.uniform(rng.standard_normal((2000, 1)))
    report = density_at_zero(measure, [1.0, 0.1, 0.001])
    assert report.points[0].reliable
    assert not report.points[-1].reliable
    # density of N(0, 1) at 0 is about 0.399, so mass / eta approaches 0.8
    assert abs(report.points[1].ratio - 0.8) < 0.2
    assert report.liminf_ratio is not None
    with pytest.raises(ConfigurationError):
        density_at_zero(measure, [0.1, 1.0])


def test_density_at_zero_sees_an_atom():
    report = density_at_zero(EmpiricalMeasure.point_mass([0.0]), [1.0, 0.5])
    assert report.atom_mass == 1.0
    assert report.points[1].ratio > report.points[0].ratio


def test_streamed_tau_matches_explicit_average(pm1_walk):
    taus = streamed_tau_table(pm1_walk, [(8, [1.5])], 0.0, 200, seed=5)
    ladder = sum_distribution_ladder(pm1_walk, list(range(1, 9)), 0.0, 200, seed=5)
    explicit = average_distributions(ladder)
    assert taus[0].ball_mass(1.5) == pytest.approx(explicit.ball_mass(1.5))


def test_dyadic_monitor_on_zero_cocycle_exceeds_every_bound():
    reports = monitor_ladder(_constant(0.0), 1, 10, 0.1, "1/d", 100, seed=0)
    ladder = reports["dyadic_ladder"]
    assert ladder.observed == 2 ** 11 - 1
    assert ladder.recurrence_evidence
    assert all(c.violated for c in ladder.cells)


def test_monitors_respected_under_unit_drift():
    reports = monitor_ladder(_constant(1.0), 1, 10, 0.5, 1.0, 100, seed=0)
    for report in reports.values():
        assert report.observed == 0.0
        assert not any(c.violated for c in report.cells)
        assert not report.recurrence_evidence


def test_monitors_need_enough_horizons():
    point = [EmpiricalMeasure.point_mass([0.0])] * 3
    with pytest.raises(InsufficientDataError):
        monitor_average_ball_bound(point, 0.1)
    with pytest.raises(InsufficientDataError):
        monitor_dyadic_ladder_bound(point, 0.1)


def test_ladder_depth_is_capped():
    with pytest.raises(ConfigurationError):
        monitor_ladder(_constant(0.0), 1, 13, 0.1, "1/d", 100, seed=0)


def test_measure_csv_export(tmp_path):
    measure = EmpiricalMeasure.uniform([[1.0, 2.0], [3.0, 4.0]])
    path = measure.to_csv(tmp_path / "sigma.csv")
    header = path.read_text().splitlines()[0]
    assert header == "x0,x1,weight"


def test_measure_summary_tabulates_ball_masses():
    measure = EmpiricalMeasure.uniform([[0.0], [0.3], [2.0], [-4.0]])
    summary = measure.summary(eta_grid=(0.5, 3.0))
    assert summary["sample_count"] == 4
    assert summary["ball_masses"] == [{"eta": 0.5, "mass": 0.5}, {"eta": 3.0, "mass": 0.75}]


def _cauchy_walk():
    return build_cocycle(IidShiftSystem(marginal=CauchyMarginal()), CocycleSpec(base=CoordinateReadBase()))


def test_averaged_cauchy_sums_stay_cauchy():
    measure = sum_distribution(_cauchy_walk(), 50, 1.0, 2000, seed=21)
    assert stats.kstest(measure.samples[:, 0], "cauchy").pvalue > 1e-3


def test_walk_variance_under_square_root_scaling(pm1_walk):
    measure = sum_distribution(pm1_walk, 400, 0.5, 4000, seed=22)
    assert 0.9 <= measure.samples[:, 0].var(ddof=1) <= 1.1


def test_density_ratio_of_uniform_steps():
    rng = np.random.default_rng(23)
    measure = EmpiricalMeasure.uniform(rng.uniform(-1.0, 1.0, size=(20000, 1)))
    report = density_at_zero(measure, [0.5, 0.1])
    for point in report.points:
        assert point.reliable
        assert abs(point.ratio - 1.0) <= 4 * point.standard_error


def test_planar_gaussian_density_at_zero():
    marginal = GaussianMarginal(mean=[0.0, 0.0], covariance=[[1.0, 0.0], [0.0, 1.0]])
    walk = build_cocycle(IidShiftSystem(marginal=marginal), CocycleSpec(base=CoordinateReadBase()))
    measure = sum_distribution(walk, 4, "1/d", 100000, seed=24)
    point = density_at_zero(measure, [0.1]).points[0]
    # max-norm ball of area 4 eta^2 around a density of 1 / (2 pi)
    assert point.reliable
    assert abs(point.ratio - 2 / np.pi) <= 4 * point.standard_error


@pytest.mark.slow
def test_averaged_cauchy_sums_at_full_scale():
    measure = sum_distribution(_cauchy_walk(), 100, 1.0, 10**4, seed=25)
    assert stats.kstest(measure.samples[:, 0], "cauchy").statistic < 0.05


@pytest.mark.slow
def test_walk_variance_at_full_scale(pm1_walk):
    measure = sum_distribution(pm1_walk, 10**4, 0.5, 10**4, seed=26)
    assert 0.9 <= measure.samples[:, 0].var(ddof=1) <= 1.1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
