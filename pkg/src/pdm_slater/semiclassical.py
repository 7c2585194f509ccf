'''Order-hbar^2 gradient expansion of the particle density and of the Slater sum.

All expansions are expressed in the effective potential V = U + hbar^2/(8 m0) lap f.
Inside hbar^2 terms grad V and lap V are replaced by grad U and lap U, so no field
is ever differentiated more than twice.
'''
import logging
import math
from typing import List, NamedTuple, Sequence, Union
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from .core import Jet2, SpaceDim, dot, gamma_function
from .exceptions import DimensionError, DomainError, NonIntegrableTermError, TurningPointError
from .fields import PDMModel

logger = logging.getLogger(__name__)

Point = Union[float, Sequence[float], np.ndarray]

_ALLOWED_NU = (-0.5, 0.0, 0.5, 1.0, 1.5, 2.0)
_MAX_DERIV_ORDER = 3


class SlaterResult(BaseModel):
    '''
    Leading (Thomas-Fermi) Slater sum, its hbar^2 correction and their sum.
    '''
    model_config = ConfigDict(frozen=True)

    leading: float
    correction: float
    total: float

    @classmethod
    def of(cls, leading: float, correction: float) -> "SlaterResult":
        return cls(leading=leading, correction=correction, total=leading + correction)

    @model_validator(mode="after")
    def _check_total(self) -> "SlaterResult":
        if self.total != self.leading + self.correction:
            raise ValueError("total must equal leading + correction")
        return self


class ExpansionTerm(BaseModel):
    '''
    One term coeff * d^k/dlambda^k [(lambda - V)^nu theta(lambda - V)] of a density expansion.
    '''
    model_config = ConfigDict(frozen=True)

    coeff: float
    nu: float
    deriv_order: int = 0

    @field_validator("nu")
    @classmethod
    def _check_nu(cls, nu: float) -> float:
        if nu not in _ALLOWED_NU:
            raise ValueError(f"nu must be one of {_ALLOWED_NU}, got {nu}")
        return nu

    @field_validator("deriv_order")
    @classmethod
    def _check_order(cls, k: int) -> int:
        if not 0 <= k <= _MAX_DERIV_ORDER:
            raise ValueError(f"deriv_order must be in 0..{_MAX_DERIV_ORDER}, got {k}")
        return k


class GradientInvariants(NamedTuple):
    '''Scalar combinations of the f and U jets entering every hbar^2 term.'''
    f: float
    U: float
    grad_f_sq: float  # (grad f / f)^2
    lap_f: float  # lap f / f
    cross: float  # grad f . grad U / f
    lap_U: float
    grad_U_sq: float


def gradient_invariants(fj: Jet2, uj: Jet2) -> GradientInvariants:
    f = fj.value
    ratio = fj.gradient / f
    return GradientInvariants(
        f=f,
        U=uj.value,
        grad_f_sq=dot(ratio, ratio),
        lap_f=fj.laplacian / f,
        cross=dot(fj.gradient, uj.gradient) / f,
        lap_U=uj.laplacian,
        grad_U_sq=dot(uj.gradient, uj.gradient),
    )


def _check_beta(beta: float) -> None:
    if not (math.isfinite(beta) and beta > 0):
        raise DomainError(f"beta must be positive and finite, got {beta}.")


def _boltzmann(exponent: float, point: Point) -> float:
    try:
        return math.exp(exponent)
    except OverflowError:
        raise DomainError(f"exp({exponent:.6g}) overflows at {np.atleast_1d(point).tolist()}.")


def effective_potential(model: PDMModel, point: Point) -> float:
    '''V = U + hbar^2/(8 m0) lap f.'''
    fj, uj = model.jets(point)
    c = model.constants
    return uj.value + c.hbar ** 2 / (8 * c.m0) * fj.laplacian


def slater_sum(model: PDMModel, point: Point, beta: float) -> SlaterResult:
    '''
    Slater sum to order hbar^2 written in the one-body potential U, in d = model.dim.
    '''
    _check_beta(beta)
    d = int(model.dim)
    c = model.constants
    g = gradient_invariants(*model.jets(point))
    mass_coeff = ((d - 1) ** 2 + 3) / 4
    braces = (
        (mass_coeff * g.grad_f_sq - (d + 2) * g.lap_f) * beta
        + ((d - 2) * g.cross - 2 * g.lap_U) * beta ** 2
        + g.grad_U_sq * beta ** 3
    )
    leading = (c.m0 / (2 * math.pi * c.hbar ** 2 * g.f * beta)) ** (d / 2) * _boltzmann(-beta * g.U, point)
    correction = leading * (c.hbar ** 2 * g.f / (24 * c.m0)) * braces
    return SlaterResult.of(leading, correction)


def slater_sum_v_form(model: PDMModel, point: Point, beta: float, expand_exponent: bool = False) -> float:
    '''
    Slater sum in the effective potential V, valid for d = 1..4.

    With ``expand_exponent`` the factor exp(-beta hbar^2 lap f / 8 m0) separating V from U
    is replaced by its first-order Taylor polynomial, the intermediate step between this
    form and ``slater_sum``.
    '''
    _check_beta(beta)
    d = int(model.dim)
    c = model.constants
    fj, uj = model.jets(point)
    g = gradient_invariants(fj, uj)
    shift = c.hbar ** 2 / (8 * c.m0) * fj.laplacian
    braces = (
        (((d - 1) ** 2 + 3) / 4 * g.grad_f_sq + (1 - d) * g.lap_f) * beta
        + ((d - 2) * g.cross - 2 * g.lap_U) * beta ** 2
        + g.grad_U_sq * beta ** 3
    )
    prefactor = (c.m0 / (2 * math.pi * c.hbar ** 2 * g.f * beta)) ** (d / 2)
    if expand_exponent:
        prefactor *= _boltzmann(-beta * g.U, point) * (1 - beta * shift)
    else:
        prefactor *= _boltzmann(-beta * (g.U + shift), point)
    return prefactor * (1 + c.hbar ** 2 * g.f / (24 * c.m0) * braces)


def _slater_d1(model: PDMModel, point: Point, beta: float) -> float:
    c = model.constants
    fj, uj = model.jets(point)
    f, fp, fpp = fj.value, fj.gradient[0], fj.laplacian
    up, upp = uj.gradient[0], uj.laplacian
    v = uj.value + c.hbar ** 2 * fpp / (8 * c.m0)
    braces = 0.75 * (fp / f) ** 2 * beta + (-(fp / f) * up - 2 * upp) * beta ** 2 + up ** 2 * beta ** 3
    return math.sqrt(c.m0 / (2 * math.pi * c.hbar ** 2 * f * beta)) * _boltzmann(-beta * v, point) * (
        1 + c.hbar ** 2 * f / (24 * c.m0) * braces
    )


def _slater_d2(model: PDMModel, point: Point, beta: float) -> float:
    c = model.constants
    fj, uj = model.jets(point)
    f = fj.value
    v = uj.value + c.hbar ** 2 * fj.laplacian / (8 * c.m0)
    grad_f_sq = float(np.sum((fj.gradient / f) ** 2))
    braces = (
        (grad_f_sq - fj.laplacian / f) * beta
        - 2 * uj.laplacian * beta ** 2
        + float(np.sum(uj.gradient ** 2)) * beta ** 3
    )
    return c.m0 / (2 * math.pi * c.hbar ** 2 * f * beta) * _boltzmann(-beta * v, point) * (
        1 + c.hbar ** 2 * f / (24 * c.m0) * braces
    )


def _slater_d3(model: PDMModel, point: Point, beta: float) -> float:
    c = model.constants
    fj, uj = model.jets(point)
    f = fj.value
    v = uj.value + c.hbar ** 2 * fj.laplacian / (8 * c.m0)
    grad_f_sq = float(np.sum((fj.gradient / f) ** 2))
    cross = float(np.sum(fj.gradient * uj.gradient)) / f
    braces = (
        (1.75 * grad_f_sq - 2 * fj.laplacian / f) * beta
        + (cross - 2 * uj.laplacian) * beta ** 2
        + float(np.sum(uj.gradient ** 2)) * beta ** 3
    )
    return (c.m0 / (2 * math.pi * c.hbar ** 2 * f * beta)) ** 1.5 * _boltzmann(-beta * v, point) * (
        1 + c.hbar ** 2 * f / (24 * c.m0) * braces
    )


def _slater_d4(model: PDMModel, point: Point, beta: float) -> float:
    c = model.constants
    fj, uj = model.jets(point)
    f = fj.value
    v = uj.value + c.hbar ** 2 * fj.laplacian / (8 * c.m0)
    grad_f_sq = float(np.sum((fj.gradient / f) ** 2))
    cross = float(np.sum(fj.gradient * uj.gradient)) / f
    braces = (
        3 * (grad_f_sq - fj.laplacian / f) * beta
        + (2 * cross - 2 * uj.laplacian) * beta ** 2
        + float(np.sum(uj.gradient ** 2)) * beta ** 3
    )
    # the mass ratio multiplies hbar^2/24m0 here as in every other dimension
    return (c.m0 / (2 * math.pi * c.hbar ** 2 * f * beta)) ** 2 * _boltzmann(-beta * v, point) * (
        1 + c.hbar ** 2 * f / (24 * c.m0) * braces
    )


_FIXED_DIM = {1: _slater_d1, 2: _slater_d2, 3: _slater_d3, 4: _slater_d4}


def slater_sum_fixed_dim(model: PDMModel, point: Point, beta: float, d: int) -> float:
    '''
    Per-dimension Slater sums, each written out by hand; cross-checks ``slater_sum_v_form``.
    '''
    _check_beta(beta)
    d = SpaceDim.of(d)
    if d != model.dim:
        raise DimensionError(f"Requested d={int(d)} for a {int(model.dim)}-dimensional model.")
    return _FIXED_DIM[int(d)](model, point, beta)


def delta_correction_1d(model: PDMModel, x: Point, beta: float) -> float:
    '''
    hbar^2 part of the one-dimensional Slater sum in terms of U.
    '''
    _check_beta(beta)
    if model.dim != SpaceDim.ONE:
        raise DimensionError(f"delta_correction_1d needs a 1-dimensional model, got d={int(model.dim)}.")
    c = model.constants
    fj, uj = model.jets(x)
    f = fj.value
    r = fj.gradient[0] / f
    fpp = fj.laplacian
    up, upp = uj.gradient[0], uj.laplacian
    braces = (
        (0.75 * (r * r) - 3 * (fpp / f)) * beta
        + (-(fj.gradient[0] * up / f) - 2 * upp) * beta ** 2
        + (up * up) * beta ** 3
    )
    leading = (c.m0 / (2 * math.pi * c.hbar ** 2 * f * beta)) ** 0.5 * _boltzmann(-beta * uj.value, x)
    return leading * (c.hbar ** 2 * f / (24 * c.m0)) * braces


def _allowed_gap(model: PDMModel, point: Point, lam: float):
    fj, uj = model.jets(point)
    c = model.constants
    v = uj.value + c.hbar ** 2 / (8 * c.m0) * fj.laplacian
    s = lam - v
    if not s > 0:
        raise TurningPointError(
            f"lambda={lam} is not above V={v} at {list(np.atleast_1d(point))}; the density is distribution-valued there."
        )
    return gradient_invariants(fj, uj), s


def density_semiclassical(model: PDMModel, point: Point, lam: float) -> float:
    '''
    Smooth part of the density expansion at Fermi energy ``lam`` (lambda > V).
    Delta-function terms vanish away from the turning surface.
    '''
    g, s = _allowed_gap(model, point, lam)
    d = int(model.dim)
    hbar, m0 = model.constants.hbar, model.constants.m0
    pi = math.pi
    if d == 1:
        root = math.sqrt(hbar ** 2 * g.f / (2 * m0))
        return (1 / pi) * math.sqrt(2 * m0 / (hbar ** 2 * g.f)) * s ** 0.5 + root * (
            g.grad_f_sq / (32 * pi) * s ** -0.5
            + (2 * g.lap_U + g.cross) / (48 * pi) * s ** -1.5
            + g.grad_U_sq / (32 * pi) * s ** -2.5
        )
    if d == 2:
        return m0 / (2 * pi * hbar ** 2 * g.f) * s + (g.grad_f_sq - g.lap_f) / (48 * pi)
    if d == 3:
        b = 1 / (24 * pi ** 2 * hbar) * math.sqrt(m0 / (2 * g.f))
        return 1 / (6 * pi ** 2 * hbar ** 3) * (2 * m0 / g.f) ** 1.5 * s ** 1.5 + b * (
            (1.75 * g.grad_f_sq - 2 * g.lap_f) * s ** 0.5
            + 0.5 * (g.cross - 2 * g.lap_U) * s ** -0.5
            - 0.25 * g.grad_U_sq * s ** -1.5
        )
    return (
        m0 ** 2 / (8 * pi ** 2 * hbar ** 4 * g.f ** 2) * s ** 2
        + m0 / (32 * pi ** 2 * hbar ** 2 * g.f) * (g.grad_f_sq - g.lap_f) * s
        + m0 / (48 * pi ** 2 * hbar ** 2 * g.f) * (g.cross - g.lap_U)
    )


def _terms(*specs) -> List[ExpansionTerm]:
    leading, *rest = specs
    terms = [ExpansionTerm(coeff=leading[0], nu=leading[1], deriv_order=leading[2])]
    terms.extend(ExpansionTerm(coeff=cf, nu=nu, deriv_order=k) for cf, nu, k in rest if cf != 0.0)
    return terms


def density_expansion_terms(model: PDMModel, point: Point, representation: str = "laplace") -> List[ExpansionTerm]:
    '''
    Density expansion at ``point`` as a list of lambda-derivative terms. The leading term
    is always first; correction terms with a zero coefficient are left out.

    ``representation="kirzhnits"`` (d = 1 only) writes every correction on
    (lambda - V)^(1/2), the form that coincides with the constant-mass commutator expansion.
    '''
    fj, uj = model.jets(point)
    g = gradient_invariants(fj, uj)
    d = int(model.dim)
    hbar, m0 = model.constants.hbar, model.constants.m0
    pi = math.pi
    if representation not in ("laplace", "kirzhnits"):
        raise DomainError(f"Unknown representation '{representation}'.")
    if representation == "kirzhnits" and d != 1:
        raise DimensionError("The kirzhnits representation exists for d=1 only.")
    if d == 1:
        root = math.sqrt(hbar ** 2 * g.f / (2 * m0))
        tf = (1 / pi) * math.sqrt(2 * m0 / (hbar ** 2 * g.f))
        mixed = 2 * g.lap_U + g.cross
        if representation == "kirzhnits":
            terms = _terms(
                (tf, 0.5, 0),
                (root * g.grad_f_sq / (16 * pi), 0.5, 1),
                (-root * mixed / (12 * pi), 0.5, 2),
                (root * g.grad_U_sq / (12 * pi), 0.5, 3),
            )
        else:
            terms = _terms(
                (tf, 0.5, 0),
                (root * g.grad_f_sq / (16 * pi), 0.5, 1),
                (-root * mixed / (24 * pi), -0.5, 1),
                (root * g.grad_U_sq / (24 * pi), -0.5, 2),
            )
    elif d == 2:
        terms = _terms(
            (m0 / (2 * pi * hbar ** 2 * g.f), 1.0, 0),
            ((g.grad_f_sq - g.lap_f) / (48 * pi), 0.0, 0),
            (-g.lap_U / (24 * pi), 0.0, 1),
            (g.grad_U_sq / (48 * pi), 0.0, 2),
        )
    elif d == 3:
        b = 1 / (24 * pi ** 2 * hbar) * math.sqrt(m0 / (2 * g.f))
        terms = _terms(
            (1 / (6 * pi ** 2 * hbar ** 3) * (2 * m0 / g.f) ** 1.5, 1.5, 0),
            (b * (1.75 * g.grad_f_sq - 2 * g.lap_f), 0.5, 0),
            (0.5 * b * (g.cross - 2 * g.lap_U), -0.5, 0),
            # (lambda - V)^(-3/2) carried as d/dlambda (lambda - V)^(-1/2)
            (0.5 * b * g.grad_U_sq, -0.5, 1),
        )
    else:
        k = m0 / (pi ** 2 * hbar ** 2 * g.f)
        terms = _terms(
            (m0 ** 2 / (8 * pi ** 2 * hbar ** 4 * g.f ** 2), 2.0, 0),
            (k / 32 * (g.grad_f_sq - g.lap_f), 1.0, 0),
            (k / 48 * (g.cross - g.lap_U), 0.0, 0),
            (k / 96 * g.grad_U_sq, 0.0, 1),
        )
    logger.debug("d=%d expansion at %s has %d terms", d, point, len(terms))
    return terms


def term_pointwise(term: ExpansionTerm, lam: float, v_value: float) -> float:
    '''Ordinary value of a term where lambda > V (theta = 1, delta terms vanish).'''
    s = lam - v_value
    if not s > 0:
        raise TurningPointError(f"lambda={lam} is not above V={v_value}.")
    falling = 1.0
    for i in range(term.deriv_order):
        falling *= term.nu - i
    return term.coeff * falling * s ** (term.nu - term.deriv_order)


def laplace_of_term(term: ExpansionTerm, v_value: float, beta: float) -> float:
    '''
    int_0^inf exp(-beta lambda) d^k/dlambda^k [(lambda - V)^nu theta(lambda - V)] dlambda
    = beta^k Gamma(nu + 1) beta^(-nu - 1) exp(-beta V), times the term coefficient.
    '''
    _check_beta(beta)
    if term.nu <= -1:
        raise NonIntegrableTermError(f"(lambda - V)^{term.nu} has no Laplace transform; write it as a derivative.")
    try:
        weight = math.exp(-beta * v_value)
    except OverflowError:
        raise DomainError(f"exp(-beta V) overflows for V={v_value:g}, beta={beta:g}.")
    return term.coeff * beta ** term.deriv_order * gamma_function(term.nu + 1) * beta ** (-term.nu - 1) * weight


def slater_from_density(model: PDMModel, point: Point, beta: float, representation: str = "laplace") -> float:
    '''
    Slater sum assembled as beta times the Laplace transform of the density expansion.
    '''
    _check_beta(beta)
    v = effective_potential(model, point)
    terms = density_expansion_terms(model, point, representation)
    return beta * math.fsum(laplace_of_term(t, v, beta) for t in terms)
