"""Normalized maximum likelihood codelengths (luckiness v = 1).

The binomial complexity is summed directly in log space; the multinomial
complexity uses the linear recurrence in the number of categories,
``C_K(n) = C_{K-1}(n) + n / (K - 2) * C_{K-2}(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

from .codelength import Codelength, DomainError
from .smml import BinomialObservation, log_binom

__all__ = [
    "NmlResult",
    "binomial_complexity",
    "log_binomial_complexity",
    "multinomial_complexity",
    "log_multinomial_complexity",
    "nml_binomial_codelength",
    "nml_asymptotic_binomial",
]


@dataclass(frozen=True)
class NmlResult:
    fit_nats: float
    log_complexity_nats: float

    @property
    def total(self) -> Codelength:
        return Codelength(self.fit_nats + self.log_complexity_nats)


def _binomial_max_loglik(n: int, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    # xlogy gives 0 * log 0 = 0, i.e. the 0^0 = 1 convention.
    return log_binom(n, y) + xlogy(y, y / n) + xlogy(n - y, (n - y) / n)


def log_binomial_complexity(n: int) -> float:
    if n < 1:
        raise DomainError("n must be positive")
    return float(logsumexp(_binomial_max_loglik(n, np.arange(n + 1))))


def binomial_complexity(n: int) -> float:
    return math.exp(log_binomial_complexity(n))


def log_multinomial_complexity(k: int, n: int) -> float:
    """Log parametric complexity of a ``k``-category multinomial with ``n`` trials."""
    if k < 1:
        raise DomainError("k must be at least 1")
    if n < 1:
        raise DomainError("n must be positive")
    if k == 1:
        return 0.0
    prev, cur = 0.0, log_binomial_complexity(n)
    for j in range(3, k + 1):
        prev, cur = cur, float(np.logaddexp(cur, math.log(n / (j - 2.0)) + prev))
    return cur


def multinomial_complexity(k: int, n: int) -> float:
    return math.exp(log_multinomial_complexity(k, n))


def nml_binomial_codelength(obs: BinomialObservation) -> NmlResult:
    fit = -float(_binomial_max_loglik(obs.n, obs.y))
    return NmlResult(fit_nats=fit, log_complexity_nats=log_binomial_complexity(obs.n))


def nml_asymptotic_binomial(n: int) -> float:
    """Asymptotic log complexity ``0.5 log(n / 2 pi) + log pi`` in nats.

    The second term is the log of the integral of the root per-sample
    Fisher information, which equals pi for the binomial.
    """
    if n < 1:
        raise DomainError("n must be positive")
    return 0.5 * math.log(n / (2.0 * math.pi)) + math.log(math.pi)
