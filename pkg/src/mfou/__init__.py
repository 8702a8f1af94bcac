"""Multivariate fractional Ornstein-Uhlenbeck volatility toolkit.

Exact simulation via block-circulant embedding, closed-form stationary
cross-covariances, minimum-distance parameter estimation, Monte Carlo
validation, and spillover indices for the causal variant.
"""

__version__ = "0.1.0"

from .covariance import ccf_asymptotic, ccf_exact, ccf_exact_lags, ccf_zero, stationary_covariance
from .errors import (
    CoherencyError,
    DataError,
    DimensionError,
    InitializerError,
    MfouError,
    NumericsError,
    SimulationError,
    UnsupportedParameterError,
)
from .estimate import (
    DEFAULT_LAGS,
    EstimateResult,
    EstimatorOptions,
    LagSet,
    MomentLayout,
    assemble_model_moments,
    assemble_sample_moments,
    init_2step,
    mde_estimate,
    mde_estimate_asymptotic,
    mde_estimate_pairwise,
    mde_loss,
    sample_ccf,
)
from .model import ModelParams, ValidationReport, coherency, mfgn_cov, validate_params
from .montecarlo import McReport, McScenario, kde_density, normality_diagnostic, run_mc
from .simulate import CirculantEmbedding, PathPanel, SimConfig, sample_mfgn, simulate_mfou
from .spillover import SpilloverTable, causal_eta, g_matrix, psi_tilde, spillover_indices

__all__ = [
    "__version__",
    "ModelParams",
    "ValidationReport",
    "coherency",
    "validate_params",
    "mfgn_cov",
    "ccf_zero",
    "ccf_exact",
    "ccf_exact_lags",
    "ccf_asymptotic",
    "stationary_covariance",
    "SimConfig",
    "PathPanel",
    "CirculantEmbedding",
    "sample_mfgn",
    "simulate_mfou",
    "LagSet",
    "MomentLayout",
    "DEFAULT_LAGS",
    "sample_ccf",
    "assemble_sample_moments",
    "assemble_model_moments",
    "init_2step",
    "mde_loss",
    "mde_estimate",
    "mde_estimate_asymptotic",
    "mde_estimate_pairwise",
    "EstimatorOptions",
    "EstimateResult",
    "McScenario",
    "McReport",
    "run_mc",
    "kde_density",
    "normality_diagnostic",
    "causal_eta",
    "g_matrix",
    "psi_tilde",
    "spillover_indices",
    "SpilloverTable",
    "MfouError",
    "DimensionError",
    "UnsupportedParameterError",
    "CoherencyError",
    "SimulationError",
    "DataError",
    "NumericsError",
    "InitializerError",
]
