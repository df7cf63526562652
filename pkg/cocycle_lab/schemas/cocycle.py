from typing import List, Literal, Union

from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Annotated


def _as_vector(v):
    if isinstance(v, (int, float)):
        return [float(v)]
    return v


# Base functions f: X -> R^d

class ConstantBase(BaseModel):
    kind: Literal["constant"] = "constant"
    value: List[float] = Field(..., min_length=1)

    @field_validator("value", mode="before")
    @classmethod
    def coerce_value(cls, v):
        return _as_vector(v)


class IndicatorBase(BaseModel):
    """1{x in [0, beta)} on the rotation; integral beta"""

    kind: Literal["indicator"] = "indicator"
    beta: float = Field(..., gt=0, lt=1)


class IndicatorMinusMeanBase(BaseModel):
    kind: Literal["indicator_minus_mean"] = "indicator_minus_mean"
    beta: float = Field(..., gt=0, lt=1)


class CoordinateReadBase(BaseModel):
    """Reads X_0 of a shift system; absolute=True reads |X_0|"""

    kind: Literal["coordinate_read"] = "coordinate_read"
    absolute: bool = False


class OdometerOrbitBase(BaseModel):
    """Integer f with T x = T'^f(x) x, T' the digit-swapped adding machine"""

    kind: Literal["odometer_orbit"] = "odometer_orbit"


class LatticeStepBase(BaseModel):
    """Maps the symbol read at time 0 to steps[symbol]"""

    kind: Literal["lattice_step"] = "lattice_step"
    steps: List[List[float]] = Field(..., min_length=1)

    @field_validator("steps")
    @classmethod
    def validate_steps(cls, v):
        if len({len(step) for step in v}) != 1 or len(v[0]) == 0:
            raise ValueError("all steps must be nonempty vectors of the same length")
        return v


CocycleBase = Annotated[
    Union[
        ConstantBase,
        IndicatorBase,
        IndicatorMinusMeanBase,
        CoordinateReadBase,
        OdometerOrbitBase,
        LatticeStepBase,
    ],
    Field(discriminator="kind"),
]


# Bounded functions b for coboundaries b(Tx) - b(x)

class BoundedCoordinateRead(BaseModel):
    kind: Literal["bounded_coordinate_read"] = "bounded_coordinate_read"
    clamp: float = Field(..., gt=0)

    def sup_bound(self, q: int = 0) -> float:
        return self.clamp


class TrigOfRotation(BaseModel):
    """amplitude * sin(2 pi frequency x) on the rotation"""

    kind: Literal["trig_of_rotation"] = "trig_of_rotation"
    amplitude: float = Field(..., ge=0)
    frequency: int = 1

    @field_validator("frequency")
    @classmethod
    def validate_frequency(cls, v):
        if v == 0:
            raise ValueError("frequency must be nonzero")
        return v

    def sup_bound(self, q: int = 0) -> float:
        return self.amplitude


class DigitRead(BaseModel):
    kind: Literal["digit_read"] = "digit_read"
    position: int = Field(..., ge=0, le=30)

    def sup_bound(self, q: int = 0) -> float:
        return float(q - 1)


BoundedFunctionSpec = Annotated[
    Union[BoundedCoordinateRead, TrigOfRotation, DigitRead],
    Field(discriminator="kind"),
]


# Modifiers, applied left to right

class SubtractDrift(BaseModel):
    kind: Literal["subtract_drift"] = "subtract_drift"
    c: List[float] = Field(..., min_length=1)

    @field_validator("c", mode="before")
    @classmethod
    def coerce_drift(cls, v):
        return _as_vector(v)


class AddCoboundary(BaseModel):
    kind: Literal["add_coboundary"] = "add_coboundary"
    b: BoundedFunctionSpec


class Symmetrize(BaseModel):
    """(x, y) -> f(x) - f(y) on the product S = T x T"""

    kind: Literal["symmetrize"] = "symmetrize"


class ComposeShift(BaseModel):
    """f -> f o T"""

    kind: Literal["compose_shift"] = "compose_shift"


Modifier = Annotated[
    Union[SubtractDrift, AddCoboundary, Symmetrize, ComposeShift],
    Field(discriminator="kind"),
]


class CocycleSpec(BaseModel):
    base: CocycleBase
    modifiers: List[Modifier] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_modifiers(self):
        kinds = [m.kind for m in self.modifiers]
        if kinds.count("symmetrize") > 1:
            raise ValueError("symmetrize may appear at most once")
        if "symmetrize" in kinds:
            after = kinds[kinds.index("symmetrize") + 1:]
            if "add_coboundary" in after:
                raise ValueError("add_coboundary is not defined after symmetrize")
        return self

    def with_modifier(self, modifier) -> "CocycleSpec":
        return self.model_copy(update={"modifiers": [*self.modifiers, modifier]}, deep=True)

    @property
    def symmetrized(self) -> bool:
        return any(m.kind == "symmetrize" for m in self.modifiers)
