#!/usr/bin/env python3
"""
Tests for recurrence estimates, drift scans and median centering
"""
import numpy as np
import pytest

from cocycle_lab.schemas.cocycle import CocycleSpec, ConstantBase, CoordinateReadBase
from cocycle_lab.schemas.config import DriftGrid
from cocycle_lab.schemas.system import IidShiftSystem, LatticeUniformMarginal, UniformPm1Marginal
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.services.diagnostics import (
    checkpoint_horizons,
    drift_scan,
    median_drift_estimate,
    near_return_curve,
    pair_coincidence_report,
    recurrence_estimate,
    verdict_at_resolution,
)
from cocycle_lab.utils.errors import ConfigurationError
from cocycle_lab.utils.workers import WorkerPool


def test_checkpoints():
    assert checkpoint_horizons(1) == [1]
    assert checkpoint_horizons(8) == [1, 2, 4, 8]
    assert checkpoint_horizons(10) == [1, 2, 4, 8, 10]


def test_fractions_grow_with_horizon(pm1_walk):
    report = recurrence_estimate(pm1_walk, 500, [0.5, 2.5], 300, seed=1)
    for e in range(2):
        column = [row[e] for row in report.fractions]
        assert column == sorted(column)
    # a larger epsilon never lowers the fraction
    assert all(row[0] <= row[1] for row in report.fractions)
    assert report.fractions[0][0] == 0.0
    assert report.near_return_fraction(500, 0.5) == report.fractions[-1][0]
    assert near_return_curve(report) == [row[0] for row in report.fractions]


def test_first_return_times_are_even_for_the_walk(pm1_walk):
    report = recurrence_estimate(pm1_walk, 200, [0.5], 200, seed=2)
    times = [t for t in report.first_near_return_times[0] if t is not None]
    assert times
    assert all(t % 2 == 0 for t in times)


def test_walk_on_the_line_returns(pm1_walk):
    report = recurrence_estimate(pm1_walk, 2000, [0.5], 500, seed=3)
    # P(no return by 2000) is about sqrt(2 / (pi 2000)) ~ 0.018
    assert report.fractions[-1][0] >= 0.95


def test_constant_drift_never_returns():
    cocycle = build_cocycle(IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=ConstantBase(value=[1.0])))
    report = recurrence_estimate(cocycle, 100, [0.5], 100, seed=0)
    assert report.fractions[-1] == [0.0]
    assert all(t is None for t in report.first_near_return_times[0])


def test_estimate_is_invariant_to_workers(pm1_walk):
    first = recurrence_estimate(pm1_walk, 300, [0.5], 300, seed=7)
    WorkerPool(3)
    second = recurrence_estimate(pm1_walk, 300, [0.5], 300, seed=7)
    assert first.model_dump() == second.model_dump()


def test_scan_zero_cell_matches_the_estimate(pm1_walk):
    scan = drift_scan(pm1_walk, DriftGrid(low=[-1.0], high=[1.0], step=0.5), 400, 0.5, 200, seed=4)
    estimate = recurrence_estimate(pm1_walk, 400, [0.5], 200, seed=4)
    zero = next(cell for cell in scan.cells if cell.c == [0.0])
    assert zero.fraction == estimate.fractions[-1][0]
    assert zero.fractions_by_horizon == [row[0] for row in estimate.fractions]


def test_scan_flags_only_the_zero_drift_of_a_walk(pm1_walk):
    scan = drift_scan(pm1_walk, [-0.5, 0.0, 0.5], 2000, 0.5, 300, seed=5, threshold=0.9)
    assert scan.flagged() == [[0.0]]
    assert scan.verdicts() == ["not-flagged", "recurrent-at-resolution", "not-flagged"]
    assert scan.box_low == [-0.5] and scan.box_high == [0.5]


def test_scan_validates_its_inputs(pm1_walk, z2_walk):
    with pytest.raises(ConfigurationError):
        drift_scan(pm1_walk, [0.0], 100, 0.5, 50, seed=0)
    with pytest.raises(ConfigurationError):
        drift_scan(pm1_walk, [0.0], 100, 0.5, 100, seed=0, threshold=1.0)
    with pytest.raises(ConfigurationError):
        drift_scan(z2_walk, [0.0], 100, 0.5, 100, seed=0)
    with pytest.raises(ConfigurationError):
        recurrence_estimate(pm1_walk, 100, [0.0], 100, seed=0)


def test_planar_scan_on_explicit_points(z2_walk):
    scan = drift_scan(z2_walk, [[0.0, 0.0], [0.5, 0.0]], 200, 0.5, 100, seed=6, threshold=0.5)
    assert len(scan.cells) == 2
    assert scan.cells[1].fraction <= scan.cells[0].fraction


def test_verdict_rule():
    assert verdict_at_resolution(0.95, 0.95) == "recurrent-at-resolution"
    assert verdict_at_resolution(0.949, 0.95) == "not-flagged"


def test_median_drift_recovers_a_shift():
    system = IidShiftSystem(marginal=UniformPm1Marginal())
    spec = CocycleSpec(base=ConstantBase(value=[0.25]))
    report = median_drift_estimate(build_cocycle(system, spec), [10, 100, 1000], 200, seed=1)
    assert report.candidate_drift == pytest.approx(0.25)
    assert report.sup_deviation == pytest.approx(0.0)


def test_median_drift_needs_the_line(z2_walk):
    with pytest.raises(ConfigurationError):
        median_drift_estimate(z2_walk, [10], 100, seed=0)


def test_pairs_of_walks_coincide(pm1_walk):
    report = pair_coincidence_report(pm1_walk, 1000, [0.5], 200, seed=8)
    assert report.fractions[-1][0] > 0.8


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
