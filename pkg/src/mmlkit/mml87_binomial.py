"""MML87 codelength and estimator for a binomial count under a uniform prior."""

from __future__ import annotations

import math

from .codelength import Codelength, DomainError, Mml87Inputs, mml87_codelength, uncertainty_volume
from .smml import BinomialObservation, log_binom, marginal

__all__ = [
    "mml87_binomial_codelength",
    "mml87_binomial_via_core",
    "mml87_binomial_estimate",
    "binomial_fisher",
    "binomial_uncertainty_volume",
    "expected_mml87_codelength",
]


def binomial_fisher(n: int, theta: float) -> float:
    return n / (theta * (1.0 - theta))


def mml87_binomial_codelength(obs: BinomialObservation, theta: float) -> Codelength:
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    n, y = obs.n, obs.y
    nats = (
        -(y + 0.5) * math.log(theta)
        - (n - y + 0.5) * math.log1p(-theta)
        + 0.5 * (1.0 + math.log(n / 12.0) - 2.0 * float(log_binom(n, y)))
    )
    return Codelength(nats)


def mml87_binomial_via_core(obs: BinomialObservation, theta: float) -> Codelength:
    """Same codelength assembled through the generic MML87 formula."""
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    n, y = obs.n, obs.y
    nll = -(float(log_binom(n, y)) + y * math.log(theta) + (n - y) * math.log1p(-theta))
    return mml87_codelength(
        Mml87Inputs(prior_density=1.0, fisher_det=binomial_fisher(n, theta), neg_log_likelihood=nll, p=1)
    )


def mml87_binomial_estimate(obs: BinomialObservation) -> float:
    return (obs.y + 0.5) / (obs.n + 1.0)


def binomial_uncertainty_volume(n: int, theta: float) -> float:
    return uncertainty_volume(binomial_fisher(n, theta), 1)


def expected_mml87_codelength(n: int) -> Codelength:
    """Average optimal MML87 codelength over the marginal ``r(y) = 1/(n+1)``."""
    r = marginal(n)
    total = 0.0
    for y in range(n + 1):
        obs = BinomialObservation(n, y)
        total += r * mml87_binomial_codelength(obs, mml87_binomial_estimate(obs)).nats
    return Codelength(total)
