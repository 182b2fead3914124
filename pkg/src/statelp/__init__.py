"""Simulation-and-estimation lab for state-dependent impulse response methods."""

from . import exceptions
from .dgp import (
    BURN_IN,
    DsgeConfig,
    GovSpendConfig,
    MarkovChain,
    SeriesPanel,
    StvarConfig,
    default_stvar_config,
    simulate_arma,
    simulate_dsge,
    simulate_govspend,
    simulate_late,
    simulate_markov,
    simulate_simplified_income,
    simulate_stvar,
    solve_dsge_savings,
    state_standardization,
)
from .estimators import (
    InteractionSpec,
    IrfSet,
    LpResult,
    VarModel,
    fit_linear_var,
    fit_state_var,
    irf_backshift,
    irf_fixed,
    irf_moving,
    lp_iv_state,
    lp_linear,
    lp_state,
    one_step_error_moment,
    project_effects_on_states,
    projection_gap_moment,
)
from .linalg import (
    MatrixCalculusOperators,
    RegressionFit,
    cholesky_derivative,
    cholesky_lower,
    matrix_calculus_operators,
    ols,
    tsls,
    wls,
)
from .truth import (
    ClosedFormLpIv,
    EffectRecord,
    arma_true_irf,
    dsge_true_irf,
    dsge_true_irf_recursion,
    govspend_closed_form,
    govspend_decomposition,
    late_oracle,
    projection_gap_covariance,
    stvar_finite_difference_effect,
    stvar_marginal_effects,
)
from .weights import (
    WeightCurve,
    default_grid,
    omega_empirical,
    omega_gaussian,
    weighted_average_effect,
)

__version__ = "0.1.0"
