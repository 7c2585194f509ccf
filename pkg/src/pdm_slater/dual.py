'''Second-order dual numbers carried along every coordinate axis at once.

A ``Dual2`` holds a value ``v``, the gradient ``g`` and the vector ``h`` of pure
second derivatives d^2/dx_i^2 (no mixed partials). Arithmetic propagates all three
exactly, so the Laplacian of any composed expression is ``h.sum()``.
'''
import math
from typing import Callable, Dict, Tuple
import numpy as np

# name -> (f, f', f'') evaluated at the real part
ELEMENTARY: Dict[str, Tuple[Callable[[float], float], Callable[[float], float], Callable[[float], float]]] = {
    "sin": (math.sin, math.cos, lambda v: -math.sin(v)),
    "cos": (math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v)),
    "tan": (
        math.tan,
        lambda v: 1.0 + math.tan(v) ** 2,
        lambda v: 2.0 * math.tan(v) * (1.0 + math.tan(v) ** 2),
    ),
    "exp": (math.exp, math.exp, math.exp),
    "ln": (math.log, lambda v: 1.0 / v, lambda v: -1.0 / (v * v)),
    "sqrt": (
        math.sqrt,
        lambda v: 0.5 / math.sqrt(v),
        lambda v: -0.25 / (v * math.sqrt(v)),
    ),
    "atan": (
        math.atan,
        lambda v: 1.0 / (1.0 + v * v),
        lambda v: -2.0 * v / (1.0 + v * v) ** 2,
    ),
    "sinh": (math.sinh, math.cosh, math.sinh),
    "cosh": (math.cosh, math.sinh, math.cosh),
    "tanh": (
        math.tanh,
        lambda v: 1.0 - math.tanh(v) ** 2,
        lambda v: -2.0 * math.tanh(v) * (1.0 - math.tanh(v) ** 2),
    ),
    "abs": (abs, lambda v: math.copysign(1.0, v) if v != 0 else 0.0, lambda v: 0.0),
}


class Dual2:
    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray) -> None:
        self.v = v
        self.g = g
        self.h = h

    @classmethod
    def constant(cls, value: float, dim: int) -> "Dual2":
        return cls(float(value), np.zeros(dim), np.zeros(dim))

    @classmethod
    def variable(cls, value: float, axis: int, dim: int) -> "Dual2":
        '''Seeds coordinate ``axis`` (0-based) with unit slope.'''
        g = np.zeros(dim)
        g[axis] = 1.0
        return cls(float(value), g, np.zeros(dim))

    @property
    def is_constant(self) -> bool:
        return not (self.g.any() or self.h.any())

    @property
    def laplacian(self) -> float:
        return float(self.h.sum())

    def chain(self, fv: float, d1: float, d2: float) -> "Dual2":
        '''Applies a scalar function with value fv, slope d1 and curvature d2 at self.v.'''
        return Dual2(fv, d1 * self.g, d1 * self.h + d2 * self.g * self.g)

    def apply(self, name: str) -> "Dual2":
        f, df, d2f = ELEMENTARY[name]
        return self.chain(f(self.v), df(self.v), d2f(self.v))

    def __add__(self, other: "Dual2") -> "Dual2":
        return Dual2(self.v + other.v, self.g + other.g, self.h + other.h)

    def __sub__(self, other: "Dual2") -> "Dual2":
        return Dual2(self.v - other.v, self.g - other.g, self.h - other.h)

    def __neg__(self) -> "Dual2":
        return Dual2(-self.v, -self.g, -self.h)

    def __mul__(self, other: "Dual2") -> "Dual2":
        return Dual2(
            self.v * other.v,
            self.g * other.v + self.v * other.g,
            self.h * other.v + 2.0 * self.g * other.g + self.v * other.h,
        )

    def __truediv__(self, other: "Dual2") -> "Dual2":
        if other.v == 0.0:
            raise ZeroDivisionError("division by zero")
        r = self.v / other.v
        rg = (self.g - r * other.g) / other.v
        rh = (self.h - 2.0 * rg * other.g - r * other.h) / other.v
        return Dual2(r, rg, rh)

    def __pow__(self, other: "Dual2") -> "Dual2":
        if other.is_constant:
            n = other.v
            fv = math.pow(self.v, n)
            d1 = n * math.pow(self.v, n - 1.0) if n != 0.0 else 0.0
            d2 = n * (n - 1.0) * math.pow(self.v, n - 2.0) if n * (n - 1.0) != 0.0 else 0.0
            return self.chain(fv, d1, d2)
        if self.v <= 0.0:
            raise ValueError("variable exponent needs a positive base")
        return (other * self.apply("ln")).apply("exp")

    def __repr__(self) -> str:
        return f"Dual2({self.v!r}, g={list(self.g)!r}, h={list(self.h)!r})"
