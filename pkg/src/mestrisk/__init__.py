"""Maximal-MSE toolkit for location M-estimators on thinned contamination balls."""

from .core import ContaminationSpec, RiskEstimate, Side
from .edgeworth import (
    EdgeworthOrder,
    EdgeworthParams,
    binomial_moments,
    binomial_tail_bound,
    edgeworth_cdf,
    hoeffding_bound,
    truncated_normal_moment,
)
from .exactrisk import (
    GridConfig,
    LatticeDistribution,
    cdf_m_estimator,
    convolve_power,
    exact_mse_algoC,
    exact_mse_algoD,
    mse_from_tail,
    psi_pushforward,
)
from .expansion import (
    BiasVarExpansion,
    RiskExpansion,
    bias_var_expansion,
    choose_side,
    fixed_radius_mse,
    fraiman_check,
    ideal_gaussian_limit,
    median_mse_so,
    risk_expansion,
    symmetric_mse,
)
from .hampel import (
    IDENTITY_LIMIT,
    MEDIAN_LIMIT,
    InfluenceCurve,
    MomentCoefficients,
    MomentFunctions,
    QuadratureConfig,
    gaussian_coeffs,
    hampel_quadrature_config,
    make_hampel_ic,
    moment_functions,
    numeric_coeffs,
    psi_eval,
    solve_c0,
)
from .simulate import (
    SimConfig,
    empirical_mse,
    m_estimate,
    median_estimate,
    sample_contaminated,
    simulate_runs,
)

__version__ = "0.1.0"
