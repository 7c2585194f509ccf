'''Identity and convergence checks run by ``pdm-slater check``.

Each check reports pass or fail with a short detail line. A failing check never
raises, so one bad property does not hide the others.
'''
import logging
import math
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple
import numpy as np
from .core import Constants, gamma_function
from .exceptions import SlaterError
from .fields import PDMModel
from .oracles import (
    Grid1D,
    discretize_hamiltonian,
    eigendecompose,
    ho_bloch_diag,
    lowest_eigenvalues,
    pct_exact_slater,
    slater_from_spectrum,
)
from .semiclassical import (
    delta_correction_1d,
    gradient_invariants,
    slater_from_density,
    slater_sum,
    slater_sum_fixed_dim,
    slater_sum_v_form,
)

logger = logging.getLogger(__name__)

IDENTITY_RTOL = 1e-12
RATIO_RANGE = (12.0, 20.0)
SAMPLES = 100


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


Outcome = Tuple[bool, str]

_CHECKS: Dict[str, Callable[[], Outcome]] = {}


def check(name: str):
    '''Registers a check under ``name``; checks run in registration order.'''
    def wrapper(function: Callable[[], Outcome]):
        _CHECKS[name] = function
        return function
    return wrapper


def random_smooth_model(rng: np.random.Generator, dim: int, constant_mass: bool = False) -> PDMModel:
    '''
    A smooth model with a positive mass ratio (f >= 0.7) and a confining potential,
    drawn with moderate amplitudes so the hbar^2 correction stays well below the leading term.
    '''
    axes = range(1, dim + 1)
    phase = " + ".join(f"k{i}*x{i}" for i in axes)
    wave = " + ".join(f"q{i}*x{i}" for i in axes)
    radius = " + ".join(f"x{i}^2" for i in axes)
    params = {
        "a": rng.uniform(-0.3, 0.3),
        "b": rng.uniform(0.0, 0.5),
        "p": rng.uniform(0.0, 2 * math.pi),
        "s": rng.uniform(1.0, 3.0),
        "c": rng.uniform(0.1, 0.5),
        "e": rng.uniform(-0.5, 0.5),
        "t": rng.uniform(-0.5, 0.5),
    }
    for i in axes:
        params[f"k{i}"] = rng.uniform(-1.0, 1.0)
        params[f"q{i}"] = rng.uniform(-1.0, 1.0)
    f = "1" if constant_mass else f"1 + a*sin({phase} + p) + b*exp(-({radius})/s)"
    U = f"c*({radius}) + e*cos({wave}) + t*x1"
    return PDMModel.from_expressions(f, U, params, dim, Constants(hbar=0.5))


def random_samples(seed: int, dim: int, count: int = SAMPLES, constant_mass: bool = False):
    '''Yields (model, point, beta) triples from a fixed seed.'''
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_smooth_model(rng, dim, constant_mass), rng.uniform(-1.0, 1.0, dim), rng.uniform(0.5, 1.5)


def rel_diff(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _worst(pairs) -> float:
    return max(rel_diff(a, b) for a, b in pairs)


@check("gamma recurrence")
def check_gamma() -> Outcome:
    worst = max(
        rel_diff(gamma_function(a + 1), a * gamma_function(a))
        for a in np.arange(0.5, 10.0, 0.5)
    )
    return (worst <= 1e-14, f"max rel diff {worst:.3g}")


@check("dimension consistency")
def check_dimensions() -> Outcome:
    worst = 0.0
    for d in (1, 2, 3, 4):
        worst = max(worst, _worst(
            (slater_sum_v_form(m, p, b), slater_sum_fixed_dim(m, p, b, d))
            for m, p, b in random_samples(d, d)
        ))
    return (worst <= IDENTITY_RTOL, f"max rel diff {worst:.3g}")


@check("laplace reconstruction")
def check_laplace() -> Outcome:
    worst = 0.0
    for d in (1, 2, 3, 4):
        worst = max(worst, _worst(
            (slater_from_density(m, p, b), slater_sum_v_form(m, p, b))
            for m, p, b in random_samples(10 + d, d)
        ))
    worst = max(worst, _worst(
        (slater_from_density(m, p, b, "kirzhnits"), slater_from_density(m, p, b))
        for m, p, b in random_samples(20, 1)
    ))
    return (worst <= IDENTITY_RTOL, f"max rel diff {worst:.3g}")


@check("delta correction identity")
def check_delta() -> Outcome:
    mismatches = sum(
        delta_correction_1d(m, p, b) != slater_sum(m, p, b).correction
        for m, p, b in random_samples(30, 1)
    )
    return (mismatches == 0, f"{mismatches} of {SAMPLES} differ")


@check("constant mass reduction")
def check_constant_mass() -> Outcome:
    worst = 0.0
    nonzero = 0
    for d in (1, 2, 3, 4):
        for m, p, b in random_samples(40 + d, d, 25, constant_mass=True):
            g = gradient_invariants(*m.jets(p))
            nonzero += (g.grad_f_sq, g.lap_f, g.cross) != (0.0, 0.0, 0.0)
            c = m.constants
            r = slater_sum(m, p, b)
            expected = r.leading * c.hbar ** 2 / (24 * c.m0) * (-2 * g.lap_U * b ** 2 + g.grad_U_sq * b ** 3)
            worst = max(worst, rel_diff(r.correction, expected))
    passed = nonzero == 0 and worst <= IDENTITY_RTOL
    return (passed, f"{nonzero} nonzero mass terms, max rel diff {worst:.3g}")


def truncation_error(hbar: float) -> float:
    '''Relative error of the semiclassical Slater sum of the oscillator at x = 0, beta = omega = 1.'''
    constants = Constants(hbar=hbar)
    model = PDMModel.harmonic(1.0, 1, constants)
    exact = float(ho_bloch_diag(0.0, 1.0, 1.0, constants))
    return abs(slater_sum(model, 0.0, 1.0).total - exact) / exact


def v_u_difference(hbar: float, gamma: float = 0.6, x: float = 1.0, beta: float = 1.0) -> float:
    '''|V-form - U-form| relative to the leading term, for the pct model.'''
    model = PDMModel.pct(gamma, 1.0, Constants(hbar=hbar))
    r = slater_sum(model, x, beta)
    return abs(slater_sum_v_form(model, x, beta) - r.total) / r.leading


def _ratio_outcome(coarse: float, fine: float) -> Outcome:
    ratio = coarse / fine
    lo, hi = RATIO_RANGE
    return (lo <= ratio <= hi, f"E={coarse:.4g}, E/2={fine:.4g}, ratio {ratio:.3f}")


@check("truncation order")
def check_truncation() -> Outcome:
    return _ratio_outcome(truncation_error(1.0), truncation_error(0.5))


@check("v-form vs u-form")
def check_v_u() -> Outcome:
    return _ratio_outcome(v_u_difference(0.125), v_u_difference(0.0625))


@check("pct spectrum")
def check_spectrum() -> Outcome:
    grid = Grid1D(x_min=-20.0, x_max=20.0, n=4001)
    worst = 0.0
    for gamma in (0.6, 0.8):
        levels = lowest_eigenvalues(discretize_hamiltonian(PDMModel.pct(gamma), grid), 10)
        worst = max(worst, float(np.max(np.abs(levels - (np.arange(10) + 0.5)))))
    return (worst <= 1e-3, f"max |E_n - (n + 1/2)| = {worst:.3g}")


def spectral_vs_exact(gamma: float, beta: float = 1.0, grid: Optional[Grid1D] = None, half_width: float = 3.0) -> float:
    '''Max relative difference between the grid spectral and closed-form Slater sums over |x| <= half_width.'''
    grid = grid or Grid1D(x_min=-12.0, x_max=12.0, n=2401)
    model = PDMModel.pct(gamma)
    numeric = slater_from_spectrum(eigendecompose(discretize_hamiltonian(model, grid), grid.h), beta)
    x = grid.nodes
    inside = np.abs(x) <= half_width + 1e-12
    exact = pct_exact_slater(x[inside], beta, gamma, 1.0)
    return float(np.max(np.abs(numeric[inside] - exact) / exact))


@check("oracle cross-validation")
def check_oracles() -> Outcome:
    worst = max(spectral_vs_exact(g) for g in (0.6, 0.8, 1.0))
    return (worst <= 1e-4, f"max rel err {worst:.3g}")


def run_checks(names: Optional[List[str]] = None) -> List[CheckResult]:
    results = []
    for name, function in _CHECKS.items():
        if names is not None and name not in names:
            continue
        try:
            result = CheckResult(name, *function())
        except SlaterError as e:
            result = CheckResult(name, False, str(e))
        logger.info("%s", result)
        results.append(result)
    return results


def available_checks() -> List[str]:
    return list(_CHECKS)
