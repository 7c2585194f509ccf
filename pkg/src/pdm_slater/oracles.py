'''Exact references: the closed-form mapped oscillator and a spectral solver on a grid.'''
import logging
import math
from typing import Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import LinAlgError, eigh_tridiagonal
from .core import Constants, SpaceDim
from .exceptions import DimensionError, DomainError, ModelError, NumericalError, ParameterError
from .fields import PDMModel, builtin_pct_mass_ratio, eval_jet2, eval_value

logger = logging.getLogger(__name__)


class Grid1D(BaseModel):
    '''Uniform grid of n nodes x_i = x_min + i h; the wavefunction vanishes beyond both ends.'''
    model_config = ConfigDict(frozen=True, extra="forbid")

    x_min: float = Field(default=-20.0, allow_inf_nan=False)
    x_max: float = Field(default=20.0, allow_inf_nan=False)
    n: int = Field(default=4001, ge=3)

    @model_validator(mode="after")
    def _check_bounds(self) -> "Grid1D":
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        return self

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)


class SymTridiag:
    '''Symmetric tridiagonal matrix stored as its diagonal and a single off-diagonal.'''
    def __init__(self, diag: np.ndarray, offdiag: np.ndarray) -> None:
        diag = np.asarray(diag, dtype=float)
        offdiag = np.asarray(offdiag, dtype=float)
        if offdiag.shape[0] != diag.shape[0] - 1:
            raise DimensionError(f"Off-diagonal of length {offdiag.shape[0]} does not fit a {diag.shape[0]}x{diag.shape[0]} matrix.")
        self.diag = diag
        self.offdiag = offdiag

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def matvec(self, u: np.ndarray) -> np.ndarray:
        r = self.diag * u
        r[:-1] += self.offdiag * u[1:]
        r[1:] += self.offdiag * u[:-1]
        return r

    def norm(self) -> float:
        '''Frobenius norm.'''
        return float(np.sqrt(np.sum(self.diag ** 2) + 2 * np.sum(self.offdiag ** 2)))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


class SpectralDecomposition:
    '''
    Ascending eigenvalues and eigenvectors (columns) normalised so that sum_i |phi(x_i)|^2 h = 1.
    '''
    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray, h: float = 1.0) -> None:
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.h = h


def pct_map(x, gamma: float):
    '''y = x + (gamma - 1) atan(x); accepts scalars or arrays.'''
    return x + (gamma - 1.0) * np.arctan(x)


def _sinh(z: float) -> float:
    try:
        return math.sinh(z)
    except OverflowError:
        raise DomainError(f"sinh(beta hbar omega) overflows at beta hbar omega = {z:g}.")


def ho_bloch_diag(y, beta: float, omega: float, constants: Constants = Constants()):
    '''Diagonal Bloch density of the constant-mass oscillator m0 omega^2 y^2 / 2.'''
    if not (beta > 0 and omega > 0):
        raise ParameterError(f"beta and omega must be positive, got beta={beta}, omega={omega}.")
    hbar, m0 = constants.hbar, constants.m0
    z = beta * hbar * omega
    return np.sqrt(m0 * omega / (2 * math.pi * hbar * _sinh(z))) * np.exp(
        -(m0 * omega / hbar) * math.tanh(z / 2) * np.square(y)
    )


def pct_exact_slater(x, beta: float, gamma: float, omega: float, constants: Constants = Constants()):
    '''Exact Slater sum of the mapped oscillator, written in closed form.'''
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}.")
    if not (beta > 0 and omega > 0):
        raise ParameterError(f"beta and omega must be positive, got beta={beta}, omega={omega}.")
    hbar, m0 = constants.hbar, constants.m0
    z = beta * hbar * omega
    f = np.square((1 + np.square(x)) / (gamma + np.square(x)))
    y = x + (gamma - 1.0) * np.arctan(x)
    return np.sqrt(m0 * omega / (2 * math.pi * hbar * f * _sinh(z))) * np.exp(
        -(m0 * omega / hbar) * math.tanh(z / 2) * np.square(y)
    )


def pct_exact_slater_mapped(x, beta: float, gamma: float, omega: float, constants: Constants = Constants()):
    '''Same quantity through the mapping: f(x)^(-1/2) times the oscillator density at y(x).'''
    f = np.square((1 + np.square(x)) / (gamma + np.square(x)))
    return ho_bloch_diag(pct_map(x, gamma), beta, omega, constants) / np.sqrt(f)


def pct_potential_mass_form(x: float, gamma: float, omega: float, constants: Constants = Constants()) -> float:
    '''
    The mapped potential written with the mass m = m0/f and its derivatives:
    m0 omega^2 y^2/2 + hbar^2/(8m) [m''/m - 7 m'^2 / (4 m^2)].
    '''
    fj = eval_jet2(builtin_pct_mass_ratio(gamma), [x])
    hbar, m0 = constants.hbar, constants.m0
    f, fp, fpp = fj.value, fj.gradient[0], fj.laplacian
    m = m0 / f
    mp = -m0 * fp / f ** 2
    mpp = m0 * (2 * fp ** 2 / f ** 3 - fpp / f ** 2)
    y = float(pct_map(x, gamma))
    return m0 * omega ** 2 * y ** 2 / 2 + hbar ** 2 / (8 * m) * (mpp / m - 7 * mp ** 2 / (4 * m ** 2))


def discretize_hamiltonian(model: PDMModel, grid: Grid1D) -> SymTridiag:
    '''
    Flux-conservative three-point discretisation of -hbar^2/(2 m0) d/dx f d/dx + U with
    f sampled at the midpoints x_i +- h/2 and Dirichlet walls one step beyond each end.
    '''
    if model.dim != SpaceDim.ONE:
        raise DimensionError(f"The grid solver handles d=1 only, got d={int(model.dim)}.")
    x = grid.nodes
    h = grid.h
    c = model.constants
    midpoints = np.concatenate(([x[0] - h / 2], x + h / 2))
    f_mid = np.array([eval_value(model.f, [p]) for p in midpoints])
    bad = np.flatnonzero(~(f_mid > 0))
    if bad.size:
        raise ModelError(f"Mass ratio f = {f_mid[bad[0]]} is not positive at x = {midpoints[bad[0]]}.")
    u = np.array([eval_value(model.U, [p]) for p in x])
    t = c.hbar ** 2 / (2 * c.m0 * h ** 2)
    diag = t * (f_mid[1:] + f_mid[:-1]) + u
    offdiag = -t * f_mid[1:-1]
    logger.debug("Discretised %r on %d nodes, h=%g", model, grid.n, h)
    return SymTridiag(diag, offdiag)


def eigendecompose(m: SymTridiag, h: float = 1.0) -> SpectralDecomposition:
    '''
    All eigenpairs of a symmetric tridiagonal matrix, eigenvalues ascending, eigenvectors
    scaled to unit norm under the h-weighted inner product.
    '''
    if m.n < 2:
        raise DimensionError(f"Need at least a 2x2 matrix, got n={m.n}.")
    try:
        w, v = eigh_tridiagonal(m.diag, m.offdiag)
    except LinAlgError as e:
        raise NumericalError(f"Tridiagonal eigensolver did not converge: {e}")
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order] / math.sqrt(h), h)


def lowest_eigenvalues(m: SymTridiag, count: int) -> np.ndarray:
    if not 1 <= count <= m.n:
        raise DomainError(f"count must be in 1..{m.n}, got {count}.")
    try:
        return eigh_tridiagonal(m.diag, m.offdiag, eigvals_only=True, select="i", select_range=(0, count - 1))
    except LinAlgError as e:
        raise NumericalError(f"Tridiagonal eigensolver did not converge: {e}")


def slater_from_spectrum(spectrum: SpectralDecomposition, beta: float) -> np.ndarray:
    '''C(x_i) = sum_n |phi_n(x_i)|^2 exp(-beta eps_n).'''
    weights = np.exp(-beta * (spectrum.eigenvalues - spectrum.eigenvalues[0]))
    return np.square(spectrum.eigenvectors) @ weights * math.exp(-beta * spectrum.eigenvalues[0])


def slater_exact_numeric(model: PDMModel, grid: Grid1D, beta: float, spectrum: Optional[SpectralDecomposition] = None) -> np.ndarray:
    '''Slater sum on every grid node from the full spectrum of the discretised Hamiltonian.'''
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}.")
    if spectrum is None:
        spectrum = eigendecompose(discretize_hamiltonian(model, grid), grid.h)
    return slater_from_spectrum(spectrum, beta)
