"""
Shared fixtures for the cocycle-lab tests
"""
import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from cocycle_lab.schemas.cocycle import CocycleSpec, CoordinateReadBase, IndicatorBase, OdometerOrbitBase
from cocycle_lab.schemas.system import (
    IidShiftSystem,
    LatticeUniformMarginal,
    OdometerSystem,
    RotationSystem,
    UniformPm1Marginal,
)
from cocycle_lab.services.cocycle import build_cocycle
from cocycle_lab.utils.workers import WorkerPool


@pytest.fixture(autouse=True)
def single_worker():
    """Every test starts and ends on a one-worker pool"""
    WorkerPool(1)
    yield
    WorkerPool(1)


@pytest.fixture
def pm1_walk():
    return build_cocycle(IidShiftSystem(marginal=UniformPm1Marginal()), CocycleSpec(base=CoordinateReadBase()))


@pytest.fixture
def z2_walk():
    return build_cocycle(IidShiftSystem(marginal=LatticeUniformMarginal(d=2)), CocycleSpec(base=CoordinateReadBase()))


@pytest.fixture
def rotation_indicator():
    return build_cocycle(RotationSystem(), CocycleSpec(base=IndicatorBase(beta=1 / 3)))


@pytest.fixture
def odometer_orbit():
    return build_cocycle(OdometerSystem(q=3), CocycleSpec(base=OdometerOrbitBase()))
