"""
Experiment configuration schema
One JSON file describes a run: seed, system, cocycle and one block per command.
"""
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cocycle_lab.schemas.cocycle import BoundedFunctionSpec, CocycleSpec
from cocycle_lab.schemas.system import SystemSpec

SCHEMA_VERSION = 1
DEFAULT_HORIZON_BOUND = 10**8

# "1/d" normalises by n^(1/d); a number is used as the exponent itself
Exponent = Union[Literal["1/d"], float]


def resolve_exponent(exponent: Exponent, dim: int) -> float:
    if exponent == "1/d":
        return 1.0 / dim
    return float(exponent)


def default_L_grid() -> List[int]:
    return [1, 2, 4, 8, 16]


def default_monitor_epsilons() -> List[float]:
    return [2.0 ** -i for i in range(7)]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EstimateBlock(_Block):
    horizon: int = Field(10**5, ge=1)
    epsilons: Optional[List[float]] = Field(None, description="Defaults to the lattice/continuous epsilon")
    sample_count: int = Field(1000, ge=100)

    @field_validator("epsilons")
    @classmethod
    def validate_epsilons(cls, v):
        if v is not None and any(e <= 0 for e in v):
            raise ValueError("epsilons must be positive")
        return v


class DriftGrid(_Block):
    """Either explicit points or an axis-aligned box sampled with a fixed step"""

    points: Optional[List[List[float]]] = None
    low: Optional[List[float]] = None
    high: Optional[List[float]] = None
    step: Optional[float] = Field(None, gt=0)

    @field_validator("points", mode="before")
    @classmethod
    def coerce_points(cls, v):
        if v is None:
            return v
        return [p if isinstance(p, list) else [p] for p in v]

    @field_validator("low", "high", mode="before")
    @classmethod
    def coerce_corner(cls, v):
        if isinstance(v, (int, float)):
            return [float(v)]
        return v

    @model_validator(mode="after")
    def validate_grid(self):
        if self.points is None and (self.low is None or self.high is None or self.step is None):
            raise ValueError("a drift grid needs either points or low/high/step")
        if self.points is None and len(self.low) != len(self.high):
            raise ValueError("low and high must have the same dimension")
        return self

    def cells(self) -> np.ndarray:
        """Grid points as an array of shape (cells, d), rounded to 12 decimals"""
        if self.points is not None:
            return np.round(np.asarray(self.points, dtype=float), 12)
        axes = []
        for lo, hi in zip(self.low, self.high):
            count = int(np.floor((hi - lo) / self.step + 1e-9)) + 1
            axes.append(np.round(lo + self.step * np.arange(count), 12))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([axis.ravel() for axis in mesh], axis=1)

    def box(self):
        cells = self.cells()
        return cells.min(axis=0).tolist(), cells.max(axis=0).tolist()


class ScanBlock(_Block):
    grid: DriftGrid = Field(default_factory=lambda: DriftGrid(low=[-1.0], high=[1.0], step=0.1))
    horizon: int = Field(10**5, ge=1)
    epsilon: Optional[float] = Field(None, gt=0)
    sample_count: int = Field(1000, ge=100)
    threshold: float = Field(0.95, gt=0, lt=1)


class SuiteBlock(_Block):
    """Parameters shared by the check suites; None means the suite's own default"""

    horizon: Optional[int] = Field(None, ge=1)
    epsilon: Optional[float] = Field(None, gt=0)
    sample_count: Optional[int] = Field(None, ge=100)
    threshold: Optional[float] = Field(None, gt=0, lt=1)
    n_list: Optional[List[int]] = None
    K: Optional[float] = Field(None, gt=0)
    tightness_epsilon: Optional[float] = Field(None, gt=0, lt=1)
    K_grid: Optional[List[float]] = None
    tightness_epsilon_grid: Optional[List[float]] = None
    eta: Optional[float] = Field(None, gt=0)
    eta_grid: Optional[List[float]] = None
    k_range: Optional[List[int]] = None
    convolution_samples: Optional[int] = Field(None, ge=100)
    pair_budget: Optional[int] = Field(None, ge=10**4)
    grid: Optional[DriftGrid] = None
    resolution: Optional[float] = Field(None, gt=0)
    coboundary: Optional[BoundedFunctionSpec] = None
    density_floor: Optional[float] = Field(None, gt=0)
    ks_tolerance: Optional[float] = Field(None, gt=0, lt=1)
    companion_sample_count: Optional[int] = Field(None, ge=100)

    @field_validator("n_list")
    @classmethod
    def validate_n_list(cls, v):
        if v is not None and (any(n < 1 for n in v) or sorted(set(v)) != list(v)):
            raise ValueError("n_list must be strictly increasing positive integers")
        return v

    def with_defaults(self, **defaults) -> "SuiteBlock":
        """Fill every unset field from the suite's defaults"""
        updates = {k: v for k, v in defaults.items() if getattr(self, k) is None}
        return self.model_copy(update=updates)


class MonitorBlock(_Block):
    base_horizon: int = Field(1, ge=1, description="k in the horizon ladder 2^n k")
    ladder_depth: int = Field(10, ge=3, le=12)
    eta: float = Field(0.1, gt=0)
    exponent: Exponent = "1/d"
    sample_count: int = Field(1000, ge=100)
    L_grid: List[int] = Field(default_factory=default_L_grid)
    epsilon_grid: List[float] = Field(default_factory=default_monitor_epsilons)
    kernel_deltas: List[float] = Field(default_factory=lambda: [0.5, 0.1, 0.02])
    kernel_n_list: List[int] = Field(default_factory=lambda: [100, 1000])
    kernel_k_range: List[int] = Field(default_factory=lambda: list(range(0, 7)))
    kernel_eta: float = Field(1.0, gt=0, le=1)
    convolution_samples: int = Field(10**4, ge=100)
    pair_budget: int = Field(10**6, ge=10**4)


class GalleryBlock(SuiteBlock):
    profile: Literal["full", "fast"] = Field(
        "full", description="fast trades the odometer_orbit horizon 10^6 for 10^4; an explicit horizon wins"
    )


class SelftestBlock(_Block):
    sample_count: int = Field(200, ge=100)
    identity_points: int = Field(20, ge=5)
    oracle_points: int = Field(200, ge=10)
    polya_horizon: int = Field(2000, ge=100)


class ExperimentConfig(BaseModel):
    """Seeded, serialisable description of a run"""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    master_seed: int = Field(0, ge=0, lt=1 << 64)
    system: Optional[SystemSpec] = None
    cocycle: Optional[CocycleSpec] = None
    horizon_bound: int = Field(DEFAULT_HORIZON_BOUND, ge=1)
    exponent: Exponent = "1/d"
    estimate: EstimateBlock = Field(default_factory=EstimateBlock)
    scan: ScanBlock = Field(default_factory=ScanBlock)
    suite: SuiteBlock = Field(default_factory=SuiteBlock)
    gallery: GalleryBlock = Field(default_factory=GalleryBlock)
    monitor: MonitorBlock = Field(default_factory=MonitorBlock)
    selftest: SelftestBlock = Field(default_factory=SelftestBlock)
    output_dir: str = "runs"

    @field_validator("exponent")
    @classmethod
    def validate_exponent(cls, v):
        if v != "1/d" and v < 0:
            raise ValueError("exponent must be nonnegative")
        return v

    def require_model(self):
        """System and cocycle, or a configuration error naming the missing one"""
        from cocycle_lab.utils.errors import ConfigurationError

        if self.system is None or self.cocycle is None:
            missing = "system" if self.system is None else "cocycle"
            raise ConfigurationError(f"this command needs a '{missing}' section in the config")
        return self.system, self.cocycle
