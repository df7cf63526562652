from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field


class Provenance(BaseModel):
    """Where an empirical measure came from"""

    system: Dict[str, Any] = Field(default_factory=dict)
    cocycle: Dict[str, Any] = Field(default_factory=dict)
    n: Optional[int] = None
    exponent: Optional[float] = None
    seed: Optional[int] = None
    sample_count: Optional[int] = None


class CheckOutcome(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None
    bound: Optional[float] = None
    informational: bool = Field(False, description="Reported only, never decides the suite status")


# Recurrence

class RecurrenceReport(BaseModel):
    """Finite-horizon view of liminf |f(n, x)| = 0 over sampled x"""

    horizons: List[int]
    epsilons: List[float]
    sample_count: int
    seed: int
    min_norms: List[List[float]] = Field(..., description="[sample][horizon] running min of |f(n, x)|, n <= N")
    first_near_return_times: List[List[Optional[int]]] = Field(
        ..., description="[epsilon][sample] first n with |f(n, x)| < epsilon"
    )
    fractions: List[List[float]] = Field(..., description="[horizon][epsilon] near-return fraction")

    def near_return_fraction(self, horizon: int, epsilon: float) -> float:
        if epsilon in self.epsilons:
            times = self.first_near_return_times[self.epsilons.index(epsilon)]
            hits = sum(1 for t in times if t is not None and t <= horizon)
            return hits / self.sample_count
        if horizon in self.horizons:
            column = self.horizons.index(horizon)
            hits = sum(1 for row in self.min_norms if row[column] < epsilon)
            return hits / self.sample_count
        raise ValueError(f"neither epsilon={epsilon} nor horizon={horizon} was recorded")

    def standard_error(self, horizon: int, epsilon: float) -> float:
        p = self.near_return_fraction(horizon, epsilon)
        return float(np.sqrt(max(p * (1.0 - p), 0.0) / self.sample_count))

    @property
    def max_horizon(self) -> int:
        return self.horizons[-1]


class DriftCell(BaseModel):
    c: List[float]
    fraction: float
    standard_error: float
    fractions_by_horizon: List[float]
    verdict: Literal["recurrent-at-resolution", "not-flagged"]


class DriftScanReport(BaseModel):
    """Resolution-tagged evidence about the recurrence set R(f)"""

    horizon: int
    epsilon: float
    threshold: float
    seed: int
    sample_count: int
    horizons: List[int]
    box_low: List[float]
    box_high: List[float]
    cells: List[DriftCell]

    def flagged(self) -> List[List[float]]:
        return [cell.c for cell in self.cells if cell.verdict == "recurrent-at-resolution"]

    def verdicts(self) -> List[str]:
        return [cell.verdict for cell in self.cells]


class MedianDriftReport(BaseModel):
    n_list: List[int]
    medians: List[float]
    centering: List[float] = Field(..., description="a_n = -median(f(n, .)) / n")
    location: float = Field(..., description="t, median of a_n over the top half of n_list")
    sup_deviation: float
    candidate_drift: float


# Empirical measures

class TightnessReport(BaseModel):
    K: float
    epsilon: float
    passed: bool
    worst_n: Optional[int]
    worst_mass: float
    masses: List[float]
    labels: List[Optional[int]]


class TightnessGridReport(BaseModel):
    K_grid: List[float]
    epsilon_grid: List[float]
    passed: List[List[bool]] = Field(..., description="[K][epsilon]")
    any_passed: bool


class DensityPoint(BaseModel):
    eta: float
    mass: float
    ratio: float
    standard_error: float
    expected_count: float
    reliable: bool


class DensityReport(BaseModel):
    dim: int
    points: List[DensityPoint]
    atom_mass: float
    liminf_ratio: Optional[float] = Field(None, description="min ratio over reliable points")
    note: str = "fixed-horizon measure; vague limit points are not certified"


class MonitorCell(BaseModel):
    L: int
    epsilon: float
    bound: float
    violated: bool


class MonitorReport(BaseModel):
    kind: Literal["average_ball", "dyadic_ladder"]
    eta: float
    dim: int
    observed: float
    curve: List[float] = Field(default_factory=list)
    cells: List[MonitorCell]
    recurrence_evidence: bool
    note: str = ""


# Kernels

class AutocorrelationEstimate(BaseModel):
    z: List[float]
    delta: float
    value: float
    standard_error: float
    exact: bool
    pairs: int


class PeakCheckReport(BaseModel):
    delta: float
    origin: AutocorrelationEstimate
    estimates: List[AutocorrelationEstimate]
    passed: bool


class FloorCell(BaseModel):
    n: int
    k: int
    lhs: float
    floor: float
    standard_error: float
    verdict: bool


class AutocorrelationFloorCell(BaseModel):
    n: int
    delta: float
    value: float
    standard_error: float
    floor: float
    passed: bool


class FloorBoundReport(BaseModel):
    dim: int
    K: float
    eta: float
    status: Literal["precondition_failed", "consistent", "inconsistent"]
    precondition_masses: Dict[int, float]
    cells: List[FloorCell] = Field(default_factory=list)
    autocorrelation_cells: List[AutocorrelationFloorCell] = Field(default_factory=list)


# Suites

class SuiteResult(BaseModel):
    """Outcome of a check suite; a suite never reports a criterion as violated"""

    name: str
    status: Literal["hypothesis_unmet", "consistent", "inconsistent"]
    verdict: Optional[str] = None
    hypothesis_checks: List[CheckOutcome] = Field(default_factory=list)
    conclusion_checks: List[CheckOutcome] = Field(default_factory=list)
    reports: Dict[str, Any] = Field(default_factory=dict)
    resolution: Dict[str, Any] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @property
    def inconsistent(self) -> bool:
        return self.status == "inconsistent"


class RunManifest(BaseModel):
    command: str
    name: Optional[str] = None
    config_sha256: str
    package_version: str
    versions: Dict[str, str]
    workers: int
    started_at: str
    finished_at: str
    wall_time_seconds: float
    exit_code: int


class ValidationReport(BaseModel):
    config_path: Optional[str] = None
    errors: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors
