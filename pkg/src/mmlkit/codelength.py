"""Codelength arithmetic shared by every model.

All message lengths are held in nats. Bits only appear when a value is
displayed (``Codelength.bits``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

__all__ = [
    "Codelength",
    "Mml87Inputs",
    "PriorRange",
    "HypothesisResult",
    "kappa",
    "log_kappa",
    "mml87_codelength",
    "uncertainty_volume",
    "posterior_log_odds",
    "decide",
    "to_bits",
    "SUBSTANTIAL_NATS",
    "DomainError",
    "DegenerateDataError",
]

LN2 = math.log(2.0)
EULER_GAMMA = 0.5772156649

# Codelength difference (nats) conventionally read as substantial evidence.
SUBSTANTIAL_NATS = 2.3

_KAPPA = {
    1: 1.0 / 12.0,
    2: 5.0 / (36.0 * math.sqrt(3.0)),
    3: 19.0 / (192.0 * 2.0 ** (1.0 / 3.0)),
    4: 0.076603,
    5: 0.075625,
}


class DomainError(ValueError):
    """An argument lies outside the domain where a codelength is defined."""


class DegenerateDataError(ValueError):
    """The data do not identify the model (for example zero variance)."""


def to_bits(nats):
    return nats / LN2


@dataclass(frozen=True, order=True)
class Codelength:
    """A message length. ``nats`` is canonical, ``bits`` is derived."""

    nats: float

    @property
    def bits(self) -> float:
        return self.nats / LN2

    @classmethod
    def from_bits(cls, bits: float) -> "Codelength":
        return cls(bits * LN2)

    def in_units(self, units: str) -> float:
        if units == "nats":
            return self.nats
        if units == "bits":
            return self.bits
        raise ValueError(f"unknown units {units!r}")

    def __add__(self, other: "Codelength") -> "Codelength":
        return Codelength(self.nats + other.nats)

    def __sub__(self, other: "Codelength") -> "Codelength":
        return Codelength(self.nats - other.nats)


@dataclass(frozen=True)
class PriorRange:
    """Log normaliser of an improper right Haar prior, ``log(Omega)``.

    It cancels in any difference between models that share the same range.
    """

    log_omega: float = 0.0


@dataclass(frozen=True)
class Mml87Inputs:
    prior_density: float
    fisher_det: float
    neg_log_likelihood: float
    p: int
    log_prior: Optional[float] = field(default=None, compare=False)
    log_fisher_det: Optional[float] = field(default=None, compare=False)


@dataclass(frozen=True)
class HypothesisResult:
    i0: Codelength
    i1: Codelength
    selected: str
    threshold_nats: float = 0.0
    bayes_factor: Optional[float] = None

    @property
    def difference_nats(self) -> float:
        """``I0 - I1``; positive values favour the alternative."""
        return self.i0.nats - self.i1.nats

    @property
    def substantial(self) -> bool:
        return abs(self.difference_nats) >= SUBSTANTIAL_NATS


def log_kappa(p: int) -> float:
    """Log of the lattice quantization constant for ``p`` parameters.

    Exact values for p <= 3, stored six-decimal values for p = 4, 5 and the
    large-p approximation beyond that.
    """
    if int(p) != p or p < 1:
        raise DomainError(f"kappa needs a positive integer dimension, got {p!r}")
    p = int(p)
    if p in _KAPPA:
        return math.log(_KAPPA[p])
    return (
        -math.log(2.0 * math.pi)
        + math.log(p * math.pi) / p
        - 2.0 * EULER_GAMMA / p
        - 1.0
    )


def kappa(p: int) -> float:
    return math.exp(log_kappa(p))


def mml87_codelength(inputs: Mml87Inputs) -> Codelength:
    """MML87 message length.

    ``-log pi + 0.5 log|J| + (p/2) log kappa_p + p/2 + nll``. The optional
    ``log_prior`` / ``log_fisher_det`` fields take precedence over the raw
    values so that callers can avoid underflow.
    """
    if inputs.log_prior is not None:
        log_prior = inputs.log_prior
    else:
        if not inputs.prior_density > 0:
            raise DomainError("prior density must be positive")
        log_prior = math.log(inputs.prior_density)
    if inputs.log_fisher_det is not None:
        log_fisher = inputs.log_fisher_det
    else:
        if not inputs.fisher_det > 0:
            raise DomainError("Fisher information determinant must be positive")
        log_fisher = math.log(inputs.fisher_det)
    p = inputs.p
    nats = (
        -log_prior
        + 0.5 * log_fisher
        + 0.5 * p * log_kappa(p)
        + 0.5 * p
        + inputs.neg_log_likelihood
    )
    return Codelength(nats)


def uncertainty_volume(fisher_det: float, p: int) -> float:
    """Volume ``(|J| kappa_p^p)^(-1/2)`` of the region of indistinguishable models."""
    if not fisher_det > 0:
        raise DomainError("Fisher information determinant must be positive")
    return math.exp(-0.5 * (math.log(fisher_det) + p * log_kappa(p)))


def posterior_log_odds(i0: Codelength, i1: Codelength) -> float:
    return i0.nats - i1.nats


def decide(i0: Codelength, i1: Codelength, threshold_nats: float = 0.0) -> str:
    """Return ``"H1"`` iff ``I1 + threshold < I0``, else ``"H0"``."""
    if threshold_nats < 0:
        raise DomainError("threshold must be nonnegative")
    return "H1" if i1.nats + threshold_nats < i0.nats else "H0"
