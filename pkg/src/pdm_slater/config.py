'''Run configuration read from JSON files.

Example::

    {
      "model": {"builtin": "pct", "params": {"gamma": 0.6, "omega": 1.0}},
      "constants": {"hbar": 1.0, "m0": 1.0},
      "run": {"d": 1, "beta": [0.5, 1.0], "grid": {"min": -5, "max": 5, "n": 201}},
      "compare": {"oracle": "pct-exact", "tolerance": 0.05}
    }
'''
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union, get_args
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from .core import Constants, SpaceDim
from .exceptions import ConfigError, SlaterError
from .fields import PDMModel, builtin_constant
from .oracles import Grid1D

logger = logging.getLogger(__name__)

OutputColumn = Literal["C_leading", "delta_C", "C_semiclassical", "C_exact", "abs_err", "rel_err"]
OUTPUT_COLUMNS: Tuple[str, ...] = get_args(OutputColumn)

_BUILTIN_PARAMS = {
    "pct": ("gamma", "omega"),
    "harmonic": ("omega",),
    "free": (),
}


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    min: float = Field(default=-5.0, allow_inf_nan=False)
    max: float = Field(default=5.0, allow_inf_nan=False)
    n: int = Field(default=201, ge=3)

    @model_validator(mode="after")
    def _check_bounds(self) -> "GridSpec":
        if not self.max > self.min:
            raise ValueError(f"max ({self.max}) must exceed min ({self.min})")
        return self

    def to_grid(self) -> Grid1D:
        return Grid1D(x_min=self.min, x_max=self.max, n=self.n)

    @property
    def nodes(self) -> np.ndarray:
        return self.to_grid().nodes


class ModelSection(BaseModel):
    '''
    Either a builtin model name or the two expressions ``f`` and ``U``; ``params``
    binds builtin parameters or named parameters of the expressions.
    '''
    model_config = ConfigDict(frozen=True, extra="forbid")

    builtin: Optional[Literal["pct", "harmonic", "free"]] = None
    f: Optional[str] = None
    U: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_kind(self) -> "ModelSection":
        has_expr = self.f is not None or self.U is not None
        if self.builtin is not None and has_expr:
            raise ValueError("give either 'builtin' or the expressions 'f' and 'U', not both")
        if self.builtin is None and (self.f is None or self.U is None):
            raise ValueError("expression models need both 'f' and 'U'")
        if self.builtin is not None:
            extra = set(self.params) - set(_BUILTIN_PARAMS[self.builtin])
            if extra:
                raise ValueError(f"unknown parameter(s) {sorted(extra)} for builtin '{self.builtin}'")
        return self


class RunSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    d: int = 1
    beta: Union[float, List[float]] = 1.0
    grid: GridSpec = GridSpec()
    lam: Optional[float] = Field(default=None, alias="lambda", allow_inf_nan=False)
    axis: int = Field(default=1, ge=1, le=4)
    workers: int = Field(default=1, ge=1)

    @field_validator("beta")
    @classmethod
    def _check_beta(cls, beta: Union[float, List[float]]) -> Union[float, List[float]]:
        values = beta if isinstance(beta, list) else [beta]
        if not values:
            raise ValueError("beta sweep must not be empty")
        for b in values:
            if not (np.isfinite(b) and b > 0):
                raise ValueError(f"beta must be positive, got {b}")
        return beta

    @model_validator(mode="after")
    def _check_axis(self) -> "RunSection":
        if self.axis > self.d:
            raise ValueError(f"axis {self.axis} does not exist in d={self.d}")
        return self

    @property
    def betas(self) -> Tuple[float, ...]:
        return tuple(self.beta) if isinstance(self.beta, list) else (self.beta,)


class CompareSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    oracle: Literal["pct-exact", "grid-spectral"] = "pct-exact"
    tolerance: Optional[float] = Field(default=1e-2, gt=0)
    # spectral box for the grid oracle
    grid: GridSpec = GridSpec(min=-20.0, max=20.0, n=4001)


class FiguresSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gammas: List[float] = Field(default_factory=lambda: [0.6, 0.8, 1.0], min_length=1)
    beta: float = Field(default=1.0, gt=0)
    omega: float = Field(default=1.0, gt=0)
    grid: GridSpec = GridSpec()


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Optional[ModelSection] = None
    constants: Constants = Constants()
    run: RunSection = RunSection()
    compare: CompareSection = CompareSection()
    figures: FiguresSection = FiguresSection()
    outputs: List[OutputColumn] = Field(default_factory=lambda: list(OUTPUT_COLUMNS))

    @property
    def columns(self) -> Tuple[str, ...]:
        return ("beta", "x") + tuple(c for c in OUTPUT_COLUMNS if c in self.outputs)

    def build_model(self) -> PDMModel:
        '''Builds the PDMModel described by the ``model`` section.'''
        if self.model is None:
            raise ConfigError("The configuration has no 'model' section.")
        section = self.model
        params = section.params
        d = SpaceDim.of(self.run.d)
        if section.builtin == "pct":
            if "gamma" not in params:
                raise ConfigError("Builtin 'pct' needs params.gamma.")
            if d != SpaceDim.ONE:
                raise ConfigError(f"Builtin 'pct' is one-dimensional, got d={int(d)}.")
            return PDMModel.pct(params["gamma"], params.get("omega", 1.0), self.constants)
        if section.builtin == "harmonic":
            return PDMModel.harmonic(params.get("omega", 1.0), d, self.constants)
        if section.builtin == "free":
            return PDMModel(builtin_constant(1.0), builtin_constant(0.0), d, self.constants, name="free")
        model = PDMModel.from_expressions(section.f, section.U, params, d, self.constants)
        for label, field in (("f", model.f), ("U", model.U)):
            if field.unbound:
                raise ConfigError(f"Expression {label}='{field.source}' uses unbound parameter(s) {sorted(field.unbound)}.")
        return model

    def with_tolerance(self, tolerance: Optional[float]) -> "RunConfig":
        if tolerance is None:
            return self
        return self.model_copy(update={"compare": self.compare.model_copy(update={"tolerance": tolerance})})


def _describe(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        config = RunConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_describe(e)}")
    if config.model is not None:
        try:
            config.build_model()
        except SlaterError as e:
            e.detail = f"{source}: {e.detail}"
            raise
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    '''
    Reads and validates a JSON run configuration. The model is built once here so
    that bad parameters, unknown names and dimension mismatches fail at load time.
    '''
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read {path}: {e.strerror or e}")
    config = parse_config(text, str(path))
    logger.info("Loaded configuration from %s", path)
    return config
