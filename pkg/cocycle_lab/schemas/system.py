from math import isqrt
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Annotated

ROW_SUM_TOLERANCE = 1e-12
STATIONARY_TOLERANCE = 1e-9


def golden_alpha() -> int:
    """Odd 64-bit truncation of (sqrt(5) - 1) / 2 as a fraction of 2^64"""
    scaled_root5 = isqrt(5 << 128)  # floor(sqrt(5) * 2^64)
    return ((scaled_root5 - (1 << 64)) >> 1) | 1


# Marginal catalogue of the i.i.d. shift (closed set)

class UniformPm1Marginal(BaseModel):
    kind: Literal["uniform_pm1"] = "uniform_pm1"

    @property
    def dim(self) -> int:
        return 1


class LatticeUniformMarginal(BaseModel):
    """Uniform on the 2d unit vectors of Z^d"""

    kind: Literal["lattice_uniform"] = "lattice_uniform"
    d: int = Field(..., ge=1, le=16)

    @property
    def dim(self) -> int:
        return self.d


class CauchyMarginal(BaseModel):
    kind: Literal["cauchy"] = "cauchy"
    scale: float = Field(1.0, gt=0)

    @property
    def dim(self) -> int:
        return 1


class GaussianMarginal(BaseModel):
    kind: Literal["gaussian"] = "gaussian"
    mean: List[float] = Field(..., min_length=1)
    covariance: List[List[float]]

    @model_validator(mode="after")
    def validate_covariance(self):
        cov = np.asarray(self.covariance, dtype=float)
        d = len(self.mean)
        if cov.shape != (d, d):
            raise ValueError(f"covariance must be {d}x{d}, got shape {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            raise ValueError("covariance must be positive definite") from e
        return self

    @property
    def dim(self) -> int:
        return len(self.mean)


class DiscreteMarginal(BaseModel):
    kind: Literal["discrete"] = "discrete"
    support: List[Union[float, List[float]]] = Field(..., min_length=1)
    weights: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_support(self):
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights must have the same length")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(self.weights)}")
        lengths = {len(s) if isinstance(s, list) else 0 for s in self.support}
        if len(lengths) != 1:
            raise ValueError("support points must all have the same dimension")
        return self

    def support_array(self) -> np.ndarray:
        return np.asarray(
            [s if isinstance(s, list) else [s] for s in self.support], dtype=float
        )

    @property
    def dim(self) -> int:
        first = self.support[0]
        return len(first) if isinstance(first, list) else 1


Marginal = Annotated[
    Union[
        UniformPm1Marginal,
        LatticeUniformMarginal,
        CauchyMarginal,
        GaussianMarginal,
        DiscreteMarginal,
    ],
    Field(discriminator="kind"),
]


# Systems

class RotationSystem(BaseModel):
    """x -> x + alpha on the 2^64-point discretised circle"""

    kind: Literal["rotation"] = "rotation"
    alpha: int = Field(default_factory=golden_alpha, description="Rotation angle as a 64-bit fraction")

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v):
        if v % (1 << 64) == 0:
            raise ValueError("rotation alpha must be nonzero modulo 2^64")
        if not 0 < v < (1 << 64):
            raise ValueError("rotation alpha must lie in [1, 2^64)")
        return v


class OdometerSystem(BaseModel):
    """Adding machine on {0, ..., q-1}^N"""

    kind: Literal["odometer"] = "odometer"
    q: int = Field(3, ge=2, le=36)


class IidShiftSystem(BaseModel):
    kind: Literal["iid_shift"] = "iid_shift"
    marginal: Marginal


class MarkovShiftSystem(BaseModel):
    kind: Literal["markov_shift"] = "markov_shift"
    transition: List[List[float]] = Field(..., min_length=1)
    stationary: List[float] = Field(..., min_length=1)
    state_values: Optional[List[float]] = Field(None, description="Real value read for each state")

    @model_validator(mode="after")
    def validate_chain(self):
        P = np.asarray(self.transition, dtype=float)
        pi = np.asarray(self.stationary, dtype=float)
        k = len(self.stationary)
        if P.shape != (k, k):
            raise ValueError(f"transition matrix must be {k}x{k}, got shape {P.shape}")
        if (P < 0).any() or (pi < 0).any():
            raise ValueError("transition and stationary entries must be nonnegative")
        row_error = np.abs(P.sum(axis=1) - 1.0).max()
        if row_error > ROW_SUM_TOLERANCE:
            raise ValueError(f"transition rows must sum to 1 (max error {row_error:.3e})")
        if abs(pi.sum() - 1.0) > ROW_SUM_TOLERANCE:
            raise ValueError("stationary vector must sum to 1")
        stationary_error = np.abs(pi @ P - pi).max()
        if stationary_error > STATIONARY_TOLERANCE:
            raise ValueError(f"stationary vector must satisfy pi P = pi (max error {stationary_error:.3e})")
        if self.state_values is not None and len(self.state_values) != k:
            raise ValueError("state_values must have one entry per state")
        return self

    @property
    def n_states(self) -> int:
        return len(self.stationary)


class ProductSystem(BaseModel):
    """Independent product S = A x B, stepped simultaneously"""

    kind: Literal["product"] = "product"
    left: "SystemSpec"
    right: "SystemSpec"


SystemSpec = Annotated[
    Union[RotationSystem, OdometerSystem, IidShiftSystem, MarkovShiftSystem, ProductSystem],
    Field(discriminator="kind"),
]

ProductSystem.model_rebuild()


def is_shift(spec) -> bool:
    return spec.kind in ("iid_shift", "markov_shift")


def coordinate_dim(spec) -> int:
    """Dimension of the value read at time 0 of a shift system"""
    if spec.kind == "iid_shift":
        return spec.marginal.dim
    if spec.kind == "markov_shift":
        return 1
    raise ValueError(f"{spec.kind} has no coordinates")
