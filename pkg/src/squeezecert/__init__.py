"""Finite-statistics certification of spin squeezing.

A library and CLI that decides whether measurement data supports a
squeezing claim: analytic upper bounds on the p-value of the observed
witness, required sample sizes, the universal lower bound from an
explicit non-squeezed mixture, and an exact small-N collective-spin
Monte Carlo oracle that validates every analytic bound.
"""

from .bounds import (
    OptimizationResult,
    SweepPoint,
    bernstein_prime_pvalue,
    bernstein_pvalue_gamma_c,
    bernstein_tail,
    gamma_c_extrema,
    mcdiarmid_pvalue,
    mu_perp_sweep,
    optimize_tangent,
    required_m_bernstein_c,
    required_m_bernstein_c_fixed_gamma,
    required_m_bernstein_prime,
    required_m_mcdiarmid,
)
from .catalog import DeficitRow, builtin_catalog, deficit_report, load_catalog, save_catalog
from .errors import (
    BlockingError,
    DivisionError,
    DomainError,
    EmptyBatch,
    InfeasibleError,
    LatticeError,
    MissingField,
    NullViolation,
    PairingError,
    ParseError,
    RangeError,
    SizeError,
    SqueezecertError,
    TooFewSamples,
    ValidationError,
)
from .estimators import (
    GammaCExtrema,
    gamma_c_from_summary,
    gamma_c_observed,
    gamma_c_point,
    gamma_linear,
    gamma_prime_blocks,
    gamma_provider_from_batch,
    gamma_provider_from_summary,
    gamma_tilde,
    sample_variance,
    second_moment_estimate,
    wineland_xi2,
)
from .lowerbound import (
    LowerBoundModel,
    min_m_lower,
    necessary_m_asymptote,
    p_star,
    r_max,
    r_max_floor,
    rho_moments,
)
from .model import (
    BoundReport,
    ExperimentEntry,
    MeasurementBatch,
    SummaryStats,
    TangentPoint,
    batch_from_csv_text,
    load_batch_csv,
    outcome_lattice,
    save_batch_csv,
    summary_from_batch,
    validate_batch,
)
from .simulator import (
    AXIS_X,
    AXIS_Y,
    AXIS_Z,
    OutcomeDistribution,
    StateMixture,
    SymmetricState,
    css_state,
    empirical_tail,
    exact_gamma_c,
    exact_gamma_linear,
    exact_moments,
    exact_wineland,
    measure_distribution,
    min_variance_perp_axis,
    nonsqueezed_mixture,
    one_axis_twist,
    sample_batch,
    spin_operators,
)

__version__ = "0.1.0"
