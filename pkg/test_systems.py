#!/usr/bin/env python3
"""
Tests for the measure-preserving systems: exact steps, inverses and coordinate reads
"""
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from cocycle_lab.schemas.system import (
    CauchyMarginal,
    DiscreteMarginal,
    GaussianMarginal,
    IidShiftSystem,
    LatticeUniformMarginal,
    MarkovShiftSystem,
    OdometerSystem,
    ProductSystem,
    RotationSystem,
    UniformPm1Marginal,
)
from cocycle_lab.services.systems import (
    OdometerPoint,
    ProductPoint,
    RotationPoint,
    advance,
    lanes_from_points,
    read_coordinate,
    read_symbol,
    sample_point,
    sample_points,
    step,
    step_inverse,
    swap_point,
    with_override,
)
from cocycle_lab.utils.errors import ConfigurationError, UnsupportedOperationError

SYSTEMS = [
    RotationSystem(),
    OdometerSystem(q=3),
    IidShiftSystem(marginal=UniformPm1Marginal()),
    IidShiftSystem(marginal=LatticeUniformMarginal(d=2)),
    MarkovShiftSystem(transition=[[0.9, 0.1], [0.2, 0.8]], stationary=[2 / 3, 1 / 3]),
    ProductSystem(left=RotationSystem(), right=RotationSystem()),
]


@pytest.mark.parametrize("system", SYSTEMS, ids=lambda s: s.kind)
def test_step_inverse_undoes_step(system):
    for x in sample_points(system, 11, range(1000)):
        assert step_inverse(system, step(system, x)) == x
        assert step(system, step_inverse(system, x)) == x


@pytest.mark.parametrize("system", SYSTEMS, ids=lambda s: s.kind)
def test_advance_composes(system):
    x = sample_point(system, 3)
    assert advance(system, advance(system, x, 37), -12) == advance(system, x, 25)
    assert advance(system, x, 0) == x


def test_sample_point_is_seeded():
    system = RotationSystem()
    assert sample_point(system, 5) == sample_point(system, 5)
    assert sample_point(system, 5) != sample_point(system, 6)


def test_rotation_adds_alpha_modulo_one():
    system = RotationSystem(alpha=1 << 62)
    x = RotationPoint(3 << 62)
    assert step(system, x) == RotationPoint(0)


def test_odometer_carry_through_constant_tail():
    system = OdometerSystem(q=3)
    all_twos = OdometerPoint(3, tail_digit=2)
    assert step(system, all_twos) == OdometerPoint(3, tail_digit=0)
    assert step_inverse(system, OdometerPoint(3, tail_digit=0)) == all_twos


def test_odometer_adds_with_carry():
    system = OdometerSystem(q=3)
    x = OdometerPoint(3, prefix=(2, 1), tail_digit=0)
    assert step(system, x).digits(3) == (0, 2, 0)
    assert advance(system, x, 4).digits(3) == (0, 0, 1)


def test_digit_swap_is_an_involution():
    x = sample_point(OdometerSystem(q=3), 9)
    assert swap_point(swap_point(x)) == x
    assert all(a == (3 - b) % 3 for a, b in zip(swap_point(x).digits(20), x.digits(20)))


def test_shift_coordinates_move_with_the_shift():
    system = IidShiftSystem(marginal=UniformPm1Marginal())
    x = sample_point(system, 1)
    for t in (-4, 0, 9):
        assert read_coordinate(system, step(system, x), t) == read_coordinate(system, x, t + 1)
        assert read_coordinate(system, x, t) in (-1.0, 1.0)


def test_lattice_walk_reads_unit_vectors():
    system = IidShiftSystem(marginal=LatticeUniformMarginal(d=2))
    x = sample_point(system, 2)
    for t in range(20):
        v = read_coordinate(system, x, t)
        assert np.abs(v).sum() == 1.0


def test_markov_chain_is_two_sided_and_reproducible():
    system = SYSTEMS[4]
    x = sample_point(system, 4)
    states = [read_symbol(system, x, t) for t in range(-30, 30)]
    assert set(states) <= {0, 1}
    assert states == [read_symbol(system, x, t) for t in range(-30, 30)]
    assert read_symbol(system, advance(system, x, -7), 10) == read_symbol(system, x, 3)


def test_markov_rows_must_sum_to_one():
    with pytest.raises(ValidationError):
        MarkovShiftSystem(transition=[[0.5, 0.6], [0.5, 0.5]], stationary=[0.5, 0.5])


def test_gaussian_covariance_must_be_positive_definite():
    with pytest.raises(ValidationError):
        GaussianMarginal(mean=[0.0, 0.0], covariance=[[1.0, 2.0], [2.0, 1.0]])


def test_override_patches_one_coordinate():
    system = IidShiftSystem(marginal=DiscreteMarginal(support=[0.0, 5.0], weights=[0.5, 0.5]))
    x = with_override(sample_point(system, 0), 2, 1)
    assert read_coordinate(system, x, 2) == 5.0


def test_coordinate_read_needs_a_shift():
    with pytest.raises(UnsupportedOperationError):
        read_coordinate(RotationSystem(), RotationPoint(0), 0)


def test_points_from_other_systems_are_rejected():
    with pytest.raises(ConfigurationError):
        step(OdometerSystem(q=3), RotationPoint(0))
    with pytest.raises(ConfigurationError):
        step(ProductSystem(left=RotationSystem(), right=RotationSystem()), RotationPoint(0))
    assert isinstance(sample_point(SYSTEMS[5], 1), ProductPoint)


def test_lane_windows_match_point_values():
    rotation = RotationSystem()
    points = sample_points(rotation, 3, range(4))
    window = lanes_from_points(rotation, points).window(-5, 10)
    for i, x in enumerate(points):
        for j, n in enumerate(range(-5, 5)):
            assert int(window.fracs[i, j]) == advance(rotation, x, n).frac

    walk = IidShiftSystem(marginal=LatticeUniformMarginal(d=2))
    points = sample_points(walk, 4, range(3))
    window = lanes_from_points(walk, points).window(-3, 6)
    for i, x in enumerate(points):
        for j, t in enumerate(range(-3, 3)):
            assert np.array_equal(np.ravel(window.values[i, j]), np.ravel(read_coordinate(walk, x, t)))


def test_odometer_materializes_only_the_touched_digits():
    system = OdometerSystem(q=3)
    x = OdometerPoint(3, prefix=(2, 1), tail_digit=0)
    assert x.materialized_len == 2
    assert step(system, x).materialized_len == 2
    assert advance(system, x, 4).materialized_len == 3
    assert step(system, OdometerPoint(3, tail_digit=2)).materialized_len == 0

    seeded = sample_point(system, 12)
    assert seeded.materialized_len == 0
    carry_index = next(i for i in range(200) if seeded.digit(i) != 2)
    assert step(system, seeded).materialized_len == carry_index + 1
    assert step_inverse(system, step(system, seeded)).materialized_len == 0


def test_rotation_samples_are_uniform():
    points = sample_points(RotationSystem(), 21, range(20000))
    u = np.array([p.frac for p in points], dtype=float) / 2.0 ** 64
    counts, _ = np.histogram(u, bins=20, range=(0.0, 1.0))
    assert stats.chisquare(counts).pvalue > 1e-3


def test_weyl_orbit_is_equidistributed():
    rotation = RotationSystem()
    n = 100_000
    fracs = lanes_from_points(rotation, [sample_point(rotation, 4)]).window(0, n).fracs[0]
    counts, _ = np.histogram(fracs.astype(float) / 2.0 ** 64, bins=100, range=(0.0, 1.0))
    assert np.max(np.abs(counts / n - 0.01)) < 1e-3


def test_odometer_orbit_visits_each_cylinder_equally_often():
    system = OdometerSystem(q=3)
    x = sample_point(system, 6)
    k = 3
    counts = Counter(advance(system, x, n).digits(k) for n in range(3 ** (k + 2)))
    assert len(counts) == 3 ** k
    assert set(counts.values()) == {9}


def test_product_coordinates_are_uncorrelated():
    points = sample_points(SYSTEMS[5], 5, range(10000))
    left = np.array([p.left.frac for p in points], dtype=float)
    right = np.array([p.right.frac for p in points], dtype=float)
    assert abs(np.corrcoef(left, right)[0, 1]) < 0.05


def test_cauchy_coordinates_follow_the_marginal():
    system = IidShiftSystem(marginal=CauchyMarginal(scale=2.0))
    window = lanes_from_points(system, sample_points(system, 8, range(4))).window(-500, 2500)
    values = np.ravel(window.values)
    assert values.size == 10**4
    assert stats.kstest(values, stats.cauchy(scale=2.0).cdf).pvalue > 1e-3
    x = sample_point(system, 8)
    single = lanes_from_points(system, [x]).window(3, 1).values
    assert read_coordinate(system, x, 3) == pytest.approx(float(np.ravel(single)[0]))


def test_markov_transition_frequencies_match_the_kernel():
    system = SYSTEMS[4]
    P = np.asarray(system.transition)
    states = lanes_from_points(system, sample_points(system, 13, range(20))).window(0, 5000).symbols
    counts = np.zeros((2, 2))
    for row in states:
        np.add.at(counts, (row[:-1], row[1:]), 1)
    empirical = counts / counts.sum(axis=1, keepdims=True)
    assert np.allclose(empirical, P, atol=0.015)
    occupancy = np.bincount(states.ravel(), minlength=2) / states.size
    assert np.allclose(occupancy, system.stationary, atol=0.03)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
