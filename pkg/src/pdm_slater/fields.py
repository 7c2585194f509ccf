import logging
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
from .core import Constants, Jet2, SpaceDim, as_position
from .exceptions import DimensionError, DomainError, EvaluationError, ModelError, ParameterError
from .expressions import Node, evaluate, evaluate_dual, parse_expression

logger = logging.getLogger(__name__)

BUILTIN_IDS = ("pct_mass_ratio", "pct_potential", "harmonic", "constant")

# f(x) = g(x)^2 with g = (1 + x^2)/(gamma + x^2); G1, G2 are g' and g''.
_PCT_MASS_RATIO = "((1 + x^2)/(gamma + x^2))^2"
_G0 = "((1 + x^2)/(gamma + x^2))"
_G1 = "(-2*(1 - gamma)*x/(gamma + x^2)^2)"
_G2 = "(-2*(1 - gamma)/(gamma + x^2)^2 + 8*(1 - gamma)*x^2/(gamma + x^2)^3)"
# -f'' + f'^2/(4f) = -g'^2 - 2 g g''
_PCT_POTENTIAL = (
    "m0*omega^2/2*(x + (gamma - 1)*atan(x))^2"
    f" + hbar^2/(8*m0)*(-{_G1}^2 - 2*{_G0}*{_G2})"
)


class FieldSpec:
    '''
    A scalar field given by an expression tree and the values of its named parameters.
    '''
    def __init__(self, ast: Node, params: Optional[Mapping[str, float]] = None, source: Optional[str] = None) -> None:
        self.ast = ast
        self.params: Dict[str, float] = dict(params or {})
        self.source = source if source is not None else str(ast)

    @property
    def max_axis(self) -> int:
        return self.ast.max_axis

    @property
    def unbound(self) -> set:
        return set(self.ast.parameters) - set(self.params)

    def __repr__(self) -> str:
        return f"FieldSpec({self.source!r}, params={self.params!r})"


class BuiltinField(FieldSpec):
    def __init__(self, model_id: str, template: str, params: Mapping[str, float]) -> None:
        if model_id not in BUILTIN_IDS:
            raise ParameterError(f"Unknown builtin field '{model_id}', expected one of {', '.join(BUILTIN_IDS)}.")
        super().__init__(parse_expression(template), params, template)
        self.model_id = model_id

    def __repr__(self) -> str:
        return f"BuiltinField({self.model_id!r}, params={self.params!r})"


def expression_field(text: str, params: Optional[Mapping[str, float]] = None) -> FieldSpec:
    return FieldSpec(parse_expression(text), params, text)


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ParameterError(f"{name} must be positive, got {value}.")


def builtin_pct_mass_ratio(gamma: float) -> FieldSpec:
    '''f(x) = ((1 + x^2)/(gamma + x^2))^2; identically 1 when gamma = 1.'''
    _require_positive(gamma=gamma)
    return BuiltinField("pct_mass_ratio", _PCT_MASS_RATIO, {"gamma": gamma})


def builtin_pct_potential(gamma: float, omega: float, constants: Constants = Constants()) -> FieldSpec:
    '''
    Potential whose mass-ratio profile ``builtin_pct_mass_ratio(gamma)`` maps, under
    y = x + (gamma - 1) atan(x), onto the constant-mass oscillator m0 omega^2 y^2 / 2.
    '''
    _require_positive(gamma=gamma, omega=omega)
    return BuiltinField(
        "pct_potential",
        _PCT_POTENTIAL,
        {"gamma": gamma, "omega": omega, "hbar": constants.hbar, "m0": constants.m0},
    )


def builtin_harmonic(omega: float, dim: int = 1, constants: Constants = Constants()) -> FieldSpec:
    _require_positive(omega=omega)
    d = SpaceDim.of(dim)
    squares = " + ".join(f"x{i}^2" for i in range(1, d + 1))
    return BuiltinField("harmonic", f"m0*omega^2/2*({squares})", {"omega": omega, "m0": constants.m0})


def builtin_constant(value: float) -> FieldSpec:
    return BuiltinField("constant", "c", {"c": value})


def _bindings(field: FieldSpec) -> Dict[str, float]:
    missing = field.unbound
    if missing:
        name = sorted(missing)[0]
        raise EvaluationError(f"Unbound parameter '{name}'", name)
    return field.params


def eval_jet2(field: FieldSpec, point: Union[float, Sequence[float], np.ndarray]) -> Jet2:
    '''
    Value, gradient and Laplacian of ``field`` at ``point`` by second-order dual numbers.
    '''
    coords = np.atleast_1d(np.asarray(point, dtype=float))
    if field.max_axis > coords.shape[0]:
        raise DimensionError(f"Field uses x{field.max_axis} but the point has {coords.shape[0]} coordinates.")
    r = evaluate_dual(field.ast, coords, _bindings(field))
    try:
        return Jet2(r.v, r.g, r.laplacian)
    except DomainError as e:
        raise EvaluationError(str(e.detail), field.source)


def eval_value(field: FieldSpec, point: Union[float, Sequence[float], np.ndarray]) -> float:
    '''Value only; much cheaper than ``eval_jet2`` on large grids.'''
    coords = np.atleast_1d(np.asarray(point, dtype=float))
    if field.max_axis > coords.shape[0]:
        raise DimensionError(f"Field uses x{field.max_axis} but the point has {coords.shape[0]} coordinates.")
    return evaluate(field.ast, coords, _bindings(field))


class PDMModel:
    '''
    Hamiltonian -hbar^2/(2 m0) div(f grad) + U with mass ratio f = m0/m*(r) and potential U.
    '''
    def __init__(
        self,
        f: FieldSpec,
        U: FieldSpec,
        dim: Union[int, SpaceDim] = SpaceDim.ONE,
        constants: Constants = Constants(),
        name: Optional[str] = None,
        params: Optional[Mapping[str, float]] = None,
    ) -> None:
        self.dim = SpaceDim.of(dim)
        for label, field in (("f", f), ("U", U)):
            if field.max_axis > self.dim:
                raise DimensionError(f"{label} uses x{field.max_axis} in a {int(self.dim)}-dimensional model.")
        self.f = f
        self.U = U
        self.constants = constants
        self.name = name or "expression"
        self.params: Dict[str, float] = dict(params or {})

    @classmethod
    def pct(cls, gamma: float, omega: float = 1.0, constants: Constants = Constants()) -> "PDMModel":
        return cls(
            builtin_pct_mass_ratio(gamma),
            builtin_pct_potential(gamma, omega, constants),
            SpaceDim.ONE,
            constants,
            name="pct",
            params={"gamma": gamma, "omega": omega},
        )

    @classmethod
    def harmonic(cls, omega: float = 1.0, dim: int = 1, constants: Constants = Constants()) -> "PDMModel":
        return cls(
            builtin_constant(1.0),
            builtin_harmonic(omega, dim, constants),
            dim,
            constants,
            name="harmonic",
            params={"omega": omega},
        )

    @classmethod
    def from_expressions(
        cls,
        f: str,
        U: str,
        params: Optional[Mapping[str, float]] = None,
        dim: int = 1,
        constants: Constants = Constants(),
    ) -> "PDMModel":
        '''
        Builds a model from expression strings. ``hbar`` and ``m0`` are bound from
        ``constants`` unless ``params`` binds them explicitly.
        '''
        bindings = {"hbar": constants.hbar, "m0": constants.m0}
        bindings.update(params or {})
        return cls(expression_field(f, bindings), expression_field(U, bindings), dim, constants, params=params)

    def position(self, point: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
        return as_position(point, self.dim)

    def jets(self, point: Union[float, Sequence[float], np.ndarray]) -> Tuple[Jet2, Jet2]:
        '''Jets of f and U at ``point``; f must be positive there.'''
        coords = self.position(point)
        fj = eval_jet2(self.f, coords)
        if not fj.value > 0:
            raise ModelError(f"Mass ratio f = {fj.value} is not positive at {list(coords)}.")
        return fj, eval_jet2(self.U, coords)

    def mass_ratio(self, point: Union[float, Sequence[float], np.ndarray]) -> float:
        value = eval_value(self.f, self.position(point))
        if not value > 0:
            raise ModelError(f"Mass ratio f = {value} is not positive at {list(np.atleast_1d(point))}.")
        return value

    def potential(self, point: Union[float, Sequence[float], np.ndarray]) -> float:
        return eval_value(self.U, self.position(point))

    def __repr__(self) -> str:
        return f"PDMModel(name={self.name!r}, dim={int(self.dim)}, f={self.f!r}, U={self.U!r})"
