from .core import Constants, Jet2, SpaceDim, dot, gamma_function
from .exceptions import (
    ConfigError,
    DimensionError,
    DomainError,
    EvaluationError,
    ExpressionSyntaxError,
    ModelError,
    NonIntegrableTermError,
    NumericalError,
    ParameterError,
    SlaterError,
    ToleranceExceeded,
    TurningPointError,
)
from .expressions import parse_expression
from .fields import (
    FieldSpec,
    PDMModel,
    builtin_pct_mass_ratio,
    builtin_pct_potential,
    eval_jet2,
    eval_value,
    expression_field,
)
from .semiclassical import (
    ExpansionTerm,
    SlaterResult,
    delta_correction_1d,
    density_expansion_terms,
    density_semiclassical,
    effective_potential,
    laplace_of_term,
    slater_from_density,
    slater_sum,
    slater_sum_fixed_dim,
    slater_sum_v_form,
)
from .oracles import (
    Grid1D,
    SpectralDecomposition,
    SymTridiag,
    discretize_hamiltonian,
    eigendecompose,
    ho_bloch_diag,
    pct_exact_slater,
    pct_map,
    slater_exact_numeric,
)
from .config import RunConfig, load_config
from .runner import ComparisonRow, run_compare, run_semiclassical
