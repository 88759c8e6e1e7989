"""Strict MML for binomial data under a uniform prior on the success rate.

The data space ``{0..n}`` is ordered, so an optimal partition into
contiguous segments is a shortest path through nodes ``0..n+1`` where the
edge ``(a, b)`` codes the segment ``{a..b-1}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from .codelength import Codelength, DomainError

__all__ = [
    "BinomialObservation",
    "Segment",
    "SmmlPartition",
    "PartitionError",
    "SMML_N_CAP",
    "marginal",
    "log_binom",
    "segment_estimate",
    "segment_cost",
    "partition_codelength",
    "solve_smml",
    "co_optimal_partitions",
    "brute_force_smml",
    "smml_estimate",
    "format_partition",
]

SMML_N_CAP = 2000

# Relative tolerance under which two path costs count as a tie.
TIE_RTOL = 1e-11


class PartitionError(ValueError):
    """The segments do not cover the data space exactly once, in order."""


@dataclass(frozen=True)
class BinomialObservation:
    n: int
    y: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if not 0 <= self.y <= self.n:
            raise DomainError(f"y={self.y} outside 0..{self.n}")


@dataclass(frozen=True)
class Segment:
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, y: int) -> bool:
        return self.lo <= y <= self.hi

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class SmmlPartition:
    n: int
    segments: tuple
    estimates: tuple
    masses: tuple
    expected_codelength: Codelength

    def segment_of(self, y: int) -> int:
        for j, seg in enumerate(self.segments):
            if y in seg:
                return j
        raise DomainError(f"y={y} outside 0..{self.n}")

    def __str__(self) -> str:
        return format_partition(self.segments)


def format_partition(segments: Iterable[Segment]) -> str:
    return "{" + ", ".join(str(s) for s in segments) + "}"


def marginal(n: int) -> float:
    """Marginal probability of any count ``y`` in ``n`` trials (uniform prior)."""
    if n < 1:
        raise DomainError("n must be positive")
    return 1.0 / (n + 1)


def log_binom(n: int, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return gammaln(n + 1.0) - gammaln(y + 1.0) - gammaln(n - y + 1.0)


def segment_estimate(seg: Segment, n: int) -> float:
    return (seg.lo + seg.hi) / (2.0 * n)


def segment_cost(lo: int, hi: int, n: int) -> float:
    """Additive contribution of segment ``{lo..hi}`` to the expected codelength (nats)."""
    ys = np.arange(lo, hi + 1, dtype=float)
    m = hi - lo + 1
    q = m / (n + 1.0)
    theta = (lo + hi) / (2.0 * n)
    log_lik = log_binom(n, ys) + xlogy(ys, theta) + xlogy(n - ys, 1.0 - theta)
    return -q * math.log(q) - float(log_lik.sum()) / (n + 1.0)


def _validate_cover(segments: Sequence[Segment], n: int) -> None:
    if not segments:
        raise PartitionError("empty partition")
    expected = 0
    for seg in segments:
        if seg.lo != expected or seg.hi < seg.lo:
            raise PartitionError(f"segment {seg} breaks the cover of 0..{n}")
        expected = seg.hi + 1
    if expected != n + 1:
        raise PartitionError(f"partition ends at {expected - 1}, not {n}")


def partition_codelength(segments: Sequence[Segment], n: int) -> SmmlPartition:
    segments = tuple(Segment(*s) if not isinstance(s, Segment) else s for s in segments)
    _validate_cover(segments, n)
    total = sum(segment_cost(s.lo, s.hi, n) for s in segments)
    return SmmlPartition(
        n=n,
        segments=segments,
        estimates=tuple(segment_estimate(s, n) for s in segments),
        masses=tuple(s.size / (n + 1.0) for s in segments),
        expected_codelength=Codelength(total),
    )


def _cost_matrix(n: int) -> np.ndarray:
    """``cost[a, b]`` for segment ``{a..b-1}``, built from prefix sums of log C(n, y)."""
    ys = np.arange(n + 1, dtype=float)
    prefix = np.concatenate([[0.0], np.cumsum(log_binom(n, ys))])
    a = np.arange(n + 1)[:, None]
    b = np.arange(1, n + 2)[None, :]
    m = (b - a).astype(float)
    valid = m > 0
    m = np.where(valid, m, 1.0)
    successes = (a + b - 1) * m / 2.0
    theta = np.clip(successes / (n * m), 0.0, 1.0)
    q = m / (n + 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        detail = (
            prefix[b] - prefix[a]
            + xlogy(successes, theta)
            + xlogy(n * m - successes, 1.0 - theta)
        )
    cost = -q * np.log(q) - detail / (n + 1.0)
    out = np.full((n + 2, n + 2), np.inf)
    out[: n + 1, 1:] = np.where(valid, cost, np.inf)
    return out


def solve_smml(n: int) -> SmmlPartition:
    """Optimal Strict MML partition of ``{0..n}``.

    Optimal partitions are often not unique (mirror images tie exactly).
    Among costs within ``TIE_RTOL`` of the best, fewer segments win, then
    the smallest next boundary, so the result is deterministic.
    """
    if not 1 <= n <= SMML_N_CAP:
        raise DomainError(f"n must lie in 1..{SMML_N_CAP}, got {n}")
    cost = _cost_matrix(n)
    best = np.full(n + 2, np.inf)
    best[n + 1] = 0.0
    count = np.zeros(n + 2, dtype=int)
    nxt = np.zeros(n + 2, dtype=int)
    for a in range(n, -1, -1):
        totals = cost[a, a + 1 :] + best[a + 1 :]
        lowest = totals.min()
        tied = np.flatnonzero(totals <= lowest + TIE_RTOL * max(1.0, abs(lowest)))
        counts = count[a + 1 :][tied]
        first = int(tied[np.argmin(counts)])
        nxt[a] = a + 1 + first
        best[a] = totals[first]
        count[a] = 1 + count[nxt[a]]
    segments = []
    a = 0
    while a <= n:
        segments.append(Segment(a, int(nxt[a]) - 1))
        a = int(nxt[a])
    return partition_codelength(segments, n)


def co_optimal_partitions(n: int, atol: float = 1e-9) -> list:
    """Every partition whose expected codelength is within ``atol`` nats of the optimum."""
    cost = _cost_matrix(n)
    best = np.full(n + 2, np.inf)
    best[n + 1] = 0.0
    for a in range(n, -1, -1):
        best[a] = np.min(cost[a, a + 1 :] + best[a + 1 :])
    found = []

    def walk(a, path, slack):
        if a == n + 1:
            found.append(partition_codelength(path, n))
            return
        for b in range(a + 1, n + 2):
            excess = cost[a, b] + best[b] - best[a]
            if excess <= slack:
                walk(b, path + [Segment(a, b - 1)], slack - max(excess, 0.0))

    walk(0, [], atol)
    return found


def brute_force_smml(n: int) -> SmmlPartition:
    """Exhaustive search over all ``2**n`` ordered partitions; for checking only."""
    best = None
    for cuts in itertools.product((False, True), repeat=n):
        segments, lo = [], 0
        for y, cut in enumerate(cuts):
            if cut:
                segments.append(Segment(lo, y))
                lo = y + 1
        segments.append(Segment(lo, n))
        part = partition_codelength(segments, n)
        if best is None or part.expected_codelength.nats < best.expected_codelength.nats:
            best = part
    return best


def smml_estimate(obs: BinomialObservation, part: SmmlPartition) -> float:
    if obs.n != part.n:
        raise DomainError(f"partition was built for n={part.n}, observation has n={obs.n}")
    return part.estimates[part.segment_of(obs.y)]
