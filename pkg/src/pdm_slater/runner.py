import asyncio
import csv
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, TypeVar, Union
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.interpolate import CubicSpline
from .config import RunConfig
from .exceptions import ConfigError, SlaterError, TurningPointError
from .fields import PDMModel
from .oracles import discretize_hamiltonian, eigendecompose, pct_exact_slater, slater_from_spectrum
from .semiclassical import delta_correction_1d, density_semiclassical, effective_potential, slater_sum

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class ComparisonRow(BaseModel):
    '''
    One grid point of a semiclassical run; the exact columns are set only when an oracle applies.
    '''
    model_config = ConfigDict(frozen=True)

    beta: float
    x: float
    C_leading: float
    delta_C: float
    C_semiclassical: float
    C_exact: Optional[float] = None
    abs_err: Optional[float] = None
    rel_err: Optional[float] = None

    @model_validator(mode="after")
    def _check_sum(self) -> "ComparisonRow":
        if self.C_semiclassical != self.C_leading + self.delta_C:
            raise ValueError("C_semiclassical must equal C_leading + delta_C")
        return self

    def with_exact(self, exact: float) -> "ComparisonRow":
        abs_err = abs(self.C_semiclassical - exact)
        if exact != 0:
            rel_err = abs_err / abs(exact)
        else:
            rel_err = 0.0 if abs_err == 0 else math.inf
        return self.model_copy(update={"C_exact": float(exact), "abs_err": abs_err, "rel_err": rel_err})


class DensityRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    lam: float
    V: float
    density: Optional[float]
    region: str


class ExactRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float
    x: float
    C_exact: float


class ComparisonReport:
    '''Rows of a comparison run plus the largest errors and where they occur.'''
    def __init__(self, rows: List[ComparisonRow], oracle: str, tolerance: Optional[float]) -> None:
        self.rows = rows
        self.oracle = oracle
        self.tolerance = tolerance
        worst_abs = max(rows, key=lambda r: r.abs_err)
        worst_rel = max(rows, key=lambda r: r.rel_err)
        self.max_abs_err = worst_abs.abs_err
        self.max_rel_err = worst_rel.rel_err
        self.argmax_x = worst_rel.x
        self.argmax_beta = worst_rel.beta

    @property
    def passed(self) -> bool:
        return self.tolerance is None or self.max_rel_err <= self.tolerance

    def summary(self) -> str:
        return (
            f"oracle={self.oracle} rows={len(self.rows)} max_abs_err={self.max_abs_err:.6g} "
            f"max_rel_err={self.max_rel_err:.6g} at x={self.argmax_x:g}, beta={self.argmax_beta:g}"
        )


async def _gather(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(await asyncio.gather(*(loop.run_in_executor(pool, fn, item) for item in items)))


def evaluate_points(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    '''
    Applies ``fn`` to every item, concurrently when ``workers`` > 1. Results keep the input order.
    '''
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    return asyncio.run(_gather(fn, items, workers))


def _tag_position(fn: Callable[[float], R], x: float) -> R:
    try:
        return fn(x)
    except SlaterError as e:
        e.detail = f"{e.detail} (at x={x:g})"
        raise


def _point(x: float, dim: int, axis: int) -> np.ndarray:
    p = np.zeros(dim)
    p[axis - 1] = x
    return p


def _sweep(config: RunConfig) -> List[Tuple[float, float]]:
    xs = config.run.grid.nodes
    return [(beta, float(x)) for beta in config.run.betas for x in xs]


def run_semiclassical(config: RunConfig, model: Optional[PDMModel] = None) -> List[ComparisonRow]:
    '''Slater sum (leading term, correction, total) over the run grid for every beta.'''
    model = model or config.build_model()
    dim, axis = int(model.dim), config.run.axis

    def row(item: Tuple[float, float]) -> ComparisonRow:
        beta, x = item
        r = _tag_position(lambda p: slater_sum(model, _point(p, dim, axis), beta), x)
        return ComparisonRow(beta=beta, x=x, C_leading=r.leading, delta_C=r.correction, C_semiclassical=r.total)

    rows = evaluate_points(row, _sweep(config), config.run.workers)
    logger.info("Evaluated %d semiclassical rows for %r", len(rows), model.name)
    return rows


def run_density(config: RunConfig, model: Optional[PDMModel] = None) -> List[DensityRow]:
    '''
    Semiclassical density at Fermi energy ``run.lambda``; points with lambda <= V have
    no pointwise value and are marked forbidden.
    '''
    lam = config.run.lam
    if lam is None:
        raise ConfigError("Density runs need run.lambda.")
    model = model or config.build_model()
    dim, axis = int(model.dim), config.run.axis

    def row(x: float) -> DensityRow:
        p = _point(x, dim, axis)
        v = _tag_position(lambda _: effective_potential(model, p), x)
        try:
            rho = density_semiclassical(model, p, lam)
        except TurningPointError:
            return DensityRow(x=x, lam=lam, V=v, density=None, region="forbidden")
        return DensityRow(x=x, lam=lam, V=v, density=rho, region="allowed")

    rows = evaluate_points(row, [float(x) for x in config.run.grid.nodes], config.run.workers)
    forbidden = sum(r.region == "forbidden" for r in rows)
    if forbidden:
        logger.warning("%d of %d grid points are classically forbidden at lambda=%g", forbidden, len(rows), lam)
    return rows


def _pct_params(model: PDMModel) -> Tuple[float, float]:
    if model.name != "pct":
        raise ConfigError(f"The pct-exact oracle needs the builtin 'pct' model, got '{model.name}'.")
    return model.params["gamma"], model.params["omega"]


def run_exact_pct(config: RunConfig, model: Optional[PDMModel] = None) -> List[ExactRow]:
    '''Closed-form exact Slater sum of the builtin pct model.'''
    model = model or config.build_model()
    gamma, omega = _pct_params(model)
    xs = config.run.grid.nodes
    rows = []
    for beta in config.run.betas:
        values = pct_exact_slater(xs, beta, gamma, omega, model.constants)
        rows.extend(ExactRow(beta=beta, x=float(x), C_exact=float(c)) for x, c in zip(xs, values))
    return rows


def _spectral_curves(config: RunConfig, model: PDMModel) -> Dict[float, np.ndarray]:
    '''Spectral Slater sum per beta, resampled from the spectral box onto the run grid.'''
    box = config.compare.grid.to_grid()
    xs = config.run.grid.nodes
    if xs[0] < box.x_min or xs[-1] > box.x_max:
        raise ConfigError(
            f"Run grid [{xs[0]:g}, {xs[-1]:g}] leaves the spectral box [{box.x_min:g}, {box.x_max:g}]."
        )
    spectrum = eigendecompose(discretize_hamiltonian(model, box), box.h)
    logger.info("Diagonalised %d x %d Hamiltonian, lowest eigenvalue %.10g", box.n, box.n, spectrum.eigenvalues[0])
    return {
        beta: CubicSpline(box.nodes, slater_from_spectrum(spectrum, beta))(xs)
        for beta in config.run.betas
    }


def run_exact_grid(config: RunConfig, model: Optional[PDMModel] = None) -> List[ExactRow]:
    '''Spectral Slater sum of any one-dimensional model, on the run grid.'''
    model = model or config.build_model()
    curves = _spectral_curves(config, model)
    xs = config.run.grid.nodes
    return [
        ExactRow(beta=beta, x=float(x), C_exact=float(c))
        for beta, values in curves.items()
        for x, c in zip(xs, values)
    ]


def run_compare(config: RunConfig, model: Optional[PDMModel] = None) -> ComparisonReport:
    '''
    Semiclassical rows against the configured oracle. Breaching the tolerance is
    reported through ``ComparisonReport.passed``; the caller decides what to do with it.
    '''
    model = model or config.build_model()
    oracle = config.compare.oracle
    rows = run_semiclassical(config, model)
    if oracle == "pct-exact":
        gamma, omega = _pct_params(model)
        exact = [pct_exact_slater(r.x, r.beta, gamma, omega, model.constants) for r in rows]
    else:
        curves = _spectral_curves(config, model)
        n = config.run.grid.n
        exact = [curves[r.beta][i % n] for i, r in enumerate(rows)]
    report = ComparisonReport([r.with_exact(float(e)) for r, e in zip(rows, exact)], oracle, config.compare.tolerance)
    logger.info("%s", report.summary())
    if not report.passed:
        logger.warning("max_rel_err %.6g exceeds tolerance %g", report.max_rel_err, report.tolerance)
    return report


Table = Tuple[List[str], List[List[Optional[float]]]]


def figure_tables(config: RunConfig) -> Dict[str, Table]:
    '''
    Data behind the four one-dimensional figures, one column per gamma:
    mass ratio, semiclassical Slater sum, its hbar^2 part and the exact Slater sum.
    '''
    fig = config.figures
    xs = fig.grid.nodes
    constants = config.constants
    models = [PDMModel.pct(g, fig.omega, constants) for g in fig.gammas]
    labels = [f"gamma={g:g}" for g in fig.gammas]

    def column(fn: Callable[[PDMModel, float, float], float]) -> List[List[float]]:
        cols = [[fn(m, g, float(x)) for x in xs] for m, g in zip(models, fig.gammas)]
        return [[float(x)] + [c[i] for c in cols] for i, x in enumerate(xs)]

    tables = {
        "mass_ratio": (
            ["x"] + [f"f({s})" for s in labels],
            column(lambda m, g, x: m.mass_ratio(x)),
        ),
        "slater_semiclassical": (
            ["x"] + [f"C({s})" for s in labels],
            column(lambda m, g, x: slater_sum(m, x, fig.beta).total),
        ),
        "delta_correction": (
            ["x"] + [f"dC({s})" for s in labels],
            column(lambda m, g, x: delta_correction_1d(m, x, fig.beta)),
        ),
        "slater_exact": (
            ["x"] + [f"C_exact({s})" for s in labels],
            column(lambda m, g, x: float(pct_exact_slater(x, fig.beta, g, fig.omega, constants))),
        ),
    }
    return tables


def run_figures(config: RunConfig, out_dir: Union[str, Path]) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (header, rows) in figure_tables(config).items():
        path = out_dir / f"{name}.csv"
        write_table(path, header, rows)
        paths.append(path)
    logger.info("Wrote %d figure datasets to %s", len(paths), out_dir)
    return paths


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".15g")
    return str(value)


def _write(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def write_table(target: Union[str, Path, TextIO, None], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    '''Writes a CSV table to a path, an open stream, or stdout when ``target`` is None.'''
    if target is None:
        _write(sys.stdout, header, rows)
    elif isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as stream:
            _write(stream, header, rows)
    else:
        _write(target, header, rows)


def write_rows(target: Union[str, Path, TextIO, None], rows: Sequence[BaseModel], columns: Sequence[str]) -> None:
    '''Writes pydantic rows, picking ``columns`` from each; ``lam`` is written as ``lambda``.'''
    header = ["lambda" if c == "lam" else c for c in columns]
    write_table(target, header, ([getattr(r, c) for c in columns] for r in rows))
