"""MML87 inference for the correlation of a bivariate normal.

Codelengths here use the right Haar prior on the two means and standard
deviations. Under the alternative the correlation gets a uniform prior on
(-1, 1), density 1/2, so the alternative codelength carries an extra log 2
relative to a prior on (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codelength import (
    Codelength,
    DegenerateDataError,
    DomainError,
    HypothesisResult,
    Mml87Inputs,
    PriorRange,
    decide,
    log_kappa,
    mml87_codelength,
)
from .special import gauss_2f1

__all__ = [
    "BivariateSample",
    "CorrSufficientStats",
    "BivNormalParams",
    "RHO_LOG_PRIOR",
    "corr_stats",
    "corr_neg_log_likelihood",
    "corr_null_codelength_at",
    "corr_null_codelength",
    "corr_ml_null_estimates",
    "corr_mml_null_estimates",
    "corr_alt_codelength",
    "corr_ml_alt_estimates",
    "corr_mml_alt_estimates",
    "mml_rho",
    "olkin_pratt",
    "kl_bivariate_normal",
    "corr_test",
    "corr_codelength_difference",
]

LOG_2PI = math.log(2.0 * math.pi)
# log density of the uniform prior on rho over (-1, 1)
RHO_LOG_PRIOR = -math.log(2.0)


@dataclass(frozen=True)
class BivariateSample:
    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise DomainError("pairs must be an (n, 2) array")
        if pairs.shape[0] < 3:
            raise DomainError("need at least three pairs")
        if not np.all(np.isfinite(pairs)):
            raise DomainError("observations must be finite")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return self.pairs.shape[0]


@dataclass(frozen=True)
class CorrSufficientStats:
    n: int
    mean1: float
    mean2: float
    s1_sq: float
    s2_sq: float
    r: float


@dataclass(frozen=True)
class BivNormalParams:
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    rho: float

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise DomainError("standard deviations must be positive")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mu1, self.mu2])

    @property
    def cov(self) -> np.ndarray:
        c = self.rho * self.sigma1 * self.sigma2
        return np.array([[self.sigma1**2, c], [c, self.sigma2**2]])


def corr_stats(data: BivariateSample) -> CorrSufficientStats:
    y = data.pairs
    n = y.shape[0]
    m = y.mean(axis=0)
    d = y - m
    v = (d * d).sum(axis=0) / n
    if not (v[0] > 0 and v[1] > 0):
        raise DegenerateDataError("a marginal sample variance is zero")
    r = float((d[:, 0] * d[:, 1]).sum() / (n * math.sqrt(v[0] * v[1])))
    return CorrSufficientStats(n, float(m[0]), float(m[1]), float(v[0]), float(v[1]), min(1.0, max(-1.0, r)))


def _q_sum(st: CorrSufficientStats, p: BivNormalParams) -> float:
    """Sum of the quadratic forms Q_i, from the sufficient statistics."""
    s1, s2 = math.sqrt(st.s1_sq), math.sqrt(st.s2_sq)
    e1 = (st.mean1 - p.mu1) / p.sigma1
    e2 = (st.mean2 - p.mu2) / p.sigma2
    a1, a2 = s1 / p.sigma1, s2 / p.sigma2
    return st.n * (a1 * a1 - 2 * p.rho * st.r * a1 * a2 + a2 * a2 + e1 * e1 - 2 * p.rho * e1 * e2 + e2 * e2)


def corr_neg_log_likelihood(data: BivariateSample, params: BivNormalParams) -> float:
    st = corr_stats(data)
    one_m = 1.0 - params.rho**2
    return (
        st.n * LOG_2PI
        + st.n * math.log(params.sigma1 * params.sigma2)
        + 0.5 * st.n * math.log(one_m)
        + _q_sum(st, params) / (2.0 * one_m)
    )


def corr_null_codelength_at(
    data: BivariateSample, params: BivNormalParams, prior_range: PriorRange = PriorRange()
) -> Codelength:
    """Null codelength with ``rho = params.rho`` held fixed, at any means and scales."""
    n = data.n
    s12 = params.sigma1 * params.sigma2
    return mml87_codelength(
        Mml87Inputs(
            prior_density=0.0,
            fisher_det=0.0,
            neg_log_likelihood=corr_neg_log_likelihood(data, params),
            p=4,
            log_prior=-prior_range.log_omega - math.log(s12),
            log_fisher_det=math.log(4.0) + 4 * math.log(n) - 2 * math.log1p(-params.rho**2) - 4 * math.log(s12),
        )
    )


def corr_ml_null_estimates(data: BivariateSample, rho0: float) -> BivNormalParams:
    _check_rho(rho0)
    st = corr_stats(data)
    f = (1.0 - rho0 * st.r) / (1.0 - rho0**2)
    return BivNormalParams(st.mean1, st.mean2, math.sqrt(st.s1_sq * f), math.sqrt(st.s2_sq * f), rho0)


def corr_mml_null_estimates(data: BivariateSample, rho0: float) -> BivNormalParams:
    _check_rho(rho0)
    st = corr_stats(data)
    n = st.n
    f = n * (1.0 - rho0 * st.r) / ((n - 1) * (1.0 - rho0**2))
    return BivNormalParams(st.mean1, st.mean2, math.sqrt(st.s1_sq * f), math.sqrt(st.s2_sq * f), rho0)


def corr_null_codelength(data: BivariateSample, rho0: float, prior_range: PriorRange = PriorRange()):
    params = corr_mml_null_estimates(data, rho0)
    st = corr_stats(data)
    n = st.n
    one_m = 1.0 - rho0**2
    nats = (
        (n - 1) * math.log(params.sigma1 * params.sigma2)
        + 0.5 * (n - 2) * math.log(one_m)
        + _q_sum(st, params) / (2.0 * one_m)
        + prior_range.log_omega
        + n * math.log(math.pi)
        + (n + 1) * math.log(2.0)
        + 2.0 * (log_kappa(4) + math.log(n))
        + 2.0
    )
    return Codelength(nats), params


def corr_alt_codelength(
    data: BivariateSample, params: BivNormalParams, prior_range: PriorRange = PriorRange()
) -> Codelength:
    st = corr_stats(data)
    n = st.n
    rho = params.rho
    one_m = 1.0 - rho * rho
    nats = (
        (n - 1) * math.log(params.sigma1 * params.sigma2)
        + 0.5 * (n - 4) * math.log(one_m)
        + _q_sum(st, params) / (2.0 * one_m)
        + prior_range.log_omega
        + n * math.log(math.pi)
        + (n + 1) * math.log(2.0)
        + 2.5 * (math.log(n) + log_kappa(5))
        + 2.5
        - RHO_LOG_PRIOR
    )
    return Codelength(nats)


def corr_ml_alt_estimates(data: BivariateSample) -> BivNormalParams:
    st = corr_stats(data)
    rho = min(max(st.r, -1.0 + 1e-15), 1.0 - 1e-15)
    return BivNormalParams(st.mean1, st.mean2, math.sqrt(st.s1_sq), math.sqrt(st.s2_sq), rho)


def mml_rho(r, n):
    """MML87 correlation estimate from the sample correlation ``r``.

    Written as ``2 r (n-1) / (n + 2 + sqrt((n+2)^2 - 12 r^2 (n-1)))``, the
    rationalised form of the quadratic root, which is smooth through r = 0.
    """
    r = np.asarray(r, dtype=float)
    disc = (n + 2.0) ** 2 - 12.0 * r * r * (n - 1.0)
    out = 2.0 * r * (n - 1.0) / (n + 2.0 + np.sqrt(np.maximum(disc, 0.0)))
    return float(out) if out.ndim == 0 else out


def mml_variance_factor(r, n):
    """Ratio of the MML alternative variance estimate to the divide-by-n variance."""
    rho = mml_rho(r, n)
    return n * (n - 3.0 * rho * np.asarray(r) + 2.0) / ((n - 1.0) * (n + 2.0))


def corr_mml_alt_estimates(data: BivariateSample) -> BivNormalParams:
    st = corr_stats(data)
    rho = mml_rho(st.r, st.n)
    f = float(mml_variance_factor(st.r, st.n))
    return BivNormalParams(st.mean1, st.mean2, math.sqrt(st.s1_sq * f), math.sqrt(st.s2_sq * f), rho)


def olkin_pratt(r, n: int):
    """Minimum variance unbiased estimate ``r 2F1(1/2, 1/2; (n-1)/2; 1 - r^2)``."""
    if n < 5:
        raise DomainError("the Olkin-Pratt estimator needs n >= 5")
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(np.abs(r_arr) > 1):
        raise DomainError("|r| must not exceed 1")
    c = (n - 1) / 2.0
    out = np.zeros_like(r_arr)
    # Close to r = 0 the series converges too slowly; use the value at z = 1
    # from Gauss's summation theorem, the error is O(r^3).
    tiny = np.abs(r_arr) < 1e-6
    if np.any(tiny):
        from scipy.special import gammaln

        at_one = math.exp(gammaln(c) + gammaln(c - 1.0) - 2.0 * gammaln(c - 0.5))
        out[tiny] = r_arr[tiny] * at_one
    rest = ~tiny
    if np.any(rest):
        out[rest] = r_arr[rest] * gauss_2f1(0.5, 0.5, c, 1.0 - r_arr[rest] ** 2)
    return float(out[0]) if np.ndim(r) == 0 else out


def kl_bivariate_normal(truth: BivNormalParams, est: BivNormalParams) -> float:
    """KL(truth || est) in nats."""
    return float(
        _kl_arrays(
            truth.mu1, truth.mu2, truth.sigma1, truth.sigma2, truth.rho,
            est.mu1, est.mu2, est.sigma1, est.sigma2, est.rho,
        )
    )


def _kl_arrays(m01, m02, s01, s02, r0, m11, m12, s11, s12, r1):
    """Vectorised KL between bivariate normals given by means, sds and correlations."""
    one_m1 = 1.0 - np.asarray(r1) ** 2
    if np.any(one_m1 <= 1e-14):
        raise DomainError("estimated covariance is singular")
    # work in the coordinates standardised by the estimated scales
    a1 = np.asarray(s01) / s11
    a2 = np.asarray(s02) / s12
    d1 = (np.asarray(m01) - m11) / s11
    d2 = (np.asarray(m02) - m12) / s12
    trace = (a1 * a1 - 2 * r1 * r0 * a1 * a2 + a2 * a2) / one_m1
    maha = (d1 * d1 - 2 * r1 * d1 * d2 + d2 * d2) / one_m1
    logdet = np.log(one_m1) - np.log(1.0 - np.asarray(r0) ** 2) - 2 * np.log(a1 * a2)
    return 0.5 * (trace + maha - 2.0 + logdet)


def corr_codelength_difference(r, n, rho0):
    """``I0 - I1`` at the MML estimates, from ``r`` and ``n`` alone.

    Scale and location cancel between the hypotheses, so the difference
    depends on the data only through the sample correlation.
    """
    r = np.asarray(r, dtype=float)
    one_m0 = 1.0 - rho0 * rho0
    f0 = n * (1.0 - rho0 * r) / ((n - 1.0) * one_m0)
    # with sigma_j^2 = s_j^2 f, sum Q = n (2 - 2 rho r) / f
    i0 = (
        (n - 1) * np.log(f0)
        + 0.5 * (n - 2) * math.log(one_m0)
        + n * (2.0 - 2.0 * rho0 * r) / (2.0 * one_m0 * f0)
        + 2.0 * (log_kappa(4) + math.log(n))
        + 2.0
    )
    rho = np.asarray(mml_rho(r, n))
    one_m1 = 1.0 - rho * rho
    f1 = mml_variance_factor(r, n)
    i1 = (
        (n - 1) * np.log(f1)
        + 0.5 * (n - 4) * np.log(one_m1)
        + n * (2.0 - 2.0 * rho * r) / (2.0 * one_m1 * f1)
        + 2.5 * (math.log(n) + log_kappa(5))
        + 2.5
        - RHO_LOG_PRIOR
    )
    return i0 - i1


def corr_test(
    data: BivariateSample,
    rho0: float = 0.0,
    prior_range: PriorRange = PriorRange(),
    threshold_nats: float = 0.0,
) -> HypothesisResult:
    _check_rho(rho0)
    i0, _ = corr_null_codelength(data, rho0, prior_range)
    i1 = corr_alt_codelength(data, corr_mml_alt_estimates(data), prior_range)
    return HypothesisResult(i0, i1, decide(i0, i1, threshold_nats), threshold_nats)


def _check_rho(rho0: float) -> None:
    if not -1.0 < rho0 < 1.0:
        raise DomainError(f"rho0 must lie in (-1, 1), got {rho0}")
