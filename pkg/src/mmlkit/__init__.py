"""Minimum message length inference.

Strict MML and MML87 codelengths for binomial counts, NML complexity,
an MML two-sample t-test, an MML test of a correlation coefficient and
Monte Carlo harnesses for the associated estimators.
"""

__version__ = "0.1.0"

from .codelength import (
    Codelength,
    DegenerateDataError,
    DomainError,
    HypothesisResult,
    Mml87Inputs,
    PriorRange,
    decide,
    kappa,
    log_kappa,
    mml87_codelength,
    posterior_log_odds,
    to_bits,
    uncertainty_volume,
)
from .correlation import (
    BivariateSample,
    BivNormalParams,
    corr_codelength_difference,
    corr_test,
    kl_bivariate_normal,
    mml_rho,
    olkin_pratt,
)
from .mml87_binomial import mml87_binomial_codelength, mml87_binomial_estimate
from .nml import log_multinomial_complexity, nml_binomial_codelength
from .simulate import RiskTable, SimConfig, run_experiment
from .smml import BinomialObservation, SmmlPartition, brute_force_smml, solve_smml
from .ttest import EffectSizePrior, TwoSampleData, bayes_factor, fit_alt, ttest

__all__ = [
    "__version__",
    "Codelength",
    "DegenerateDataError",
    "DomainError",
    "HypothesisResult",
    "Mml87Inputs",
    "PriorRange",
    "decide",
    "kappa",
    "log_kappa",
    "mml87_codelength",
    "posterior_log_odds",
    "to_bits",
    "uncertainty_volume",
    "BivariateSample",
    "BivNormalParams",
    "corr_codelength_difference",
    "corr_test",
    "kl_bivariate_normal",
    "mml_rho",
    "olkin_pratt",
    "mml87_binomial_codelength",
    "mml87_binomial_estimate",
    "log_multinomial_complexity",
    "nml_binomial_codelength",
    "RiskTable",
    "SimConfig",
    "run_experiment",
    "BinomialObservation",
    "SmmlPartition",
    "brute_force_smml",
    "solve_smml",
    "EffectSizePrior",
    "TwoSampleData",
    "bayes_factor",
    "fit_alt",
    "ttest",
]
