import enum
import logging
import math
from typing import Sequence, Union
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from .exceptions import DimensionError, DomainError

logger = logging.getLogger(__name__)

Vector = Union[Sequence[float], np.ndarray]


class Constants(BaseModel):
    '''
    Unit system of a model. Both default to 1 so that lengths, energies and inverse
    temperatures are dimensionless numbers.
    '''
    model_config = ConfigDict(frozen=True, extra="forbid")

    hbar: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    m0: float = Field(default=1.0, gt=0, allow_inf_nan=False)


class SpaceDim(int, enum.Enum):
    ONE = 1
    TWO = 2
    THREE = 3
    FOUR = 4

    @classmethod
    def of(cls, d: Union[int, "SpaceDim"]) -> "SpaceDim":
        '''
        Validates a dimension; anything outside 1..4 is rejected, never extrapolated.
        '''
        try:
            if int(d) != d:
                raise ValueError(d)
            return cls(int(d))
        except (TypeError, ValueError):
            raise DimensionError(f"Unsupported dimension {d}, expected one of 1, 2, 3, 4.")


def as_position(point: Union[float, Vector], dim: Union[int, SpaceDim]) -> np.ndarray:
    '''Returns the point as a float vector of length dim.'''
    d = SpaceDim.of(dim)
    coords = np.atleast_1d(np.asarray(point, dtype=float))
    if coords.ndim != 1 or coords.shape[0] != d:
        raise DimensionError(f"Position {list(coords.ravel())} does not have {int(d)} coordinates.")
    return coords


class Jet2:
    '''
    Value, gradient and Laplacian of a scalar field at one point.
    '''
    __slots__ = ("value", "gradient", "laplacian")

    def __init__(self, value: float, gradient: Vector, laplacian: float) -> None:
        gradient = np.asarray(gradient, dtype=float)
        if not (math.isfinite(value) and math.isfinite(laplacian) and np.all(np.isfinite(gradient))):
            raise DomainError(f"Non-finite jet: value={value}, gradient={list(gradient)}, laplacian={laplacian}")
        self.value = float(value)
        self.gradient = gradient
        self.laplacian = float(laplacian)

    @property
    def dim(self) -> int:
        return self.gradient.shape[0]

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, gradient={list(self.gradient)!r}, laplacian={self.laplacian!r})"


def dot(u: Vector, v: Vector) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionError(f"Cannot take inner product of vectors of lengths {u.shape} and {v.shape}.")
    return float(np.dot(u, v))


def gamma_function(a: float) -> float:
    '''
    Gamma function at a positive integer or half-integer, built by the recurrence
    Gamma(a + 1) = a Gamma(a) from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    '''
    if not math.isfinite(a) or a <= 0:
        raise DomainError(f"Gamma function needs a positive argument, got {a}.")
    twice = round(2 * a)
    if abs(2 * a - twice) > 1e-12:
        raise DomainError(f"Gamma function is only supported at half-integers, got {a}.")
    if twice % 2 == 0:
        value, x = 1.0, 1.0
    else:
        value, x = math.sqrt(math.pi), 0.5
    for _ in range((twice - int(2 * x)) // 2):
        value *= x
        x += 1.0
    return value
