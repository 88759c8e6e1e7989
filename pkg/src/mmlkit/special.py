"""Special functions: Gauss hypergeometric series and the noncentral t density."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats

__all__ = [
    "ConvergenceError",
    "gauss_2f1",
    "noncentral_t_pdf",
    "noncentral_t_pdf_quad",
]

_MAX_TERMS = 1_000_000


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to reach its accuracy target."""


def gauss_2f1(a, b, c, z, rtol: float = 1e-14):
    """Gauss hypergeometric function by direct summation of its power series.

    Accepts scalar or array ``z`` in ``[0, 1)``. Summation stops once a
    geometric bound on the tail falls below ``rtol`` times the partial sum.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    z_arr = np.asarray(z, dtype=float)
    if np.any((z_arr < 0) | (z_arr >= 1)):
        raise ValueError("z must lie in [0, 1)")
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    total = np.ones_like(z_arr)
    term = np.ones_like(z_arr)
    active = np.ones(z_arr.shape, dtype=bool)
    k = 0
    while active.any():
        if k >= _MAX_TERMS:
            raise ConvergenceError(f"2F1({a}, {b}; {c}; z) did not converge in {_MAX_TERMS} terms")
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0))
        term[active] *= ratio * z_arr[active]
        total[active] += term[active]
        k += 1
        # Term ratios approach z from below once k is large, so the tail is
        # bounded by a geometric series with ratio max(current ratio, z).
        next_ratio = abs((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z_arr
        q = np.maximum(next_ratio, z_arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(q < 1, np.abs(term) * q / (1 - q), np.inf)
        active &= ~((tail <= rtol * np.abs(total)) | (term == 0))
    return float(total[0]) if scalar else total


def noncentral_t_pdf(x, df, nc):
    return stats.nct.pdf(x, df, nc)


def noncentral_t_pdf_quad(x: float, df: float, nc: float) -> float:
    """Noncentral t density from its mixture representation.

    ``T = (Z + nc) / sqrt(V / df)`` with ``V ~ chi2(df)``; conditioning on
    ``V = v`` gives a normal density in ``x sqrt(v / df)``.
    """

    def integrand(v):
        s = math.sqrt(v / df)
        return stats.chi2.pdf(v, df) * s * math.exp(-0.5 * (x * s - nc) ** 2) / math.sqrt(2 * math.pi)

    val, err = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-11, limit=200)
    return val
