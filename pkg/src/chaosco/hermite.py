"""Orthonormal Hermite polynomials for the standard normal weight.

The convention used everywhere is the orthonormal one: E[H_m(Z) H_n(Z)] is
the Kronecker delta for Z standard normal, H_0 = 1, H_1(x) = x,
H_2(x) = (x^2 - 1)/sqrt(2).  Evaluation goes through the stable three-term
recurrence sqrt(m+1) H_{m+1}(x) = x H_m(x) - sqrt(m) H_{m-1}(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .multiindex import MultiIndex, canonical


def eval_normalized(m: int, x):
    """H_m at x (scalar or ndarray), orthonormal normalization."""
    if m < 0:
        raise ValueError("Hermite order must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.ones_like(x)
    for k in range(m):
        h, h_prev = (x * h - math.sqrt(k) * h_prev) / math.sqrt(k + 1), h
    return h if h.ndim else float(h)


def eval_all(max_order: int, x: np.ndarray) -> np.ndarray:
    """Stack H_0..H_max_order along a new leading axis, one recurrence pass."""
    x = np.asarray(x, dtype=float)
    out = np.empty((max_order + 1,) + x.shape)
    out[0] = 1.0
    if max_order >= 1:
        out[1] = x
    for k in range(1, max_order):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


def eval_fourier_hermite(a: MultiIndex, xi) -> float:
    """Product over slots i of H_{a_i} at the i-th standardized increment."""
    a = canonical(a)
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] < len(a):
        raise ValueError(
            f"need at least {len(a)} increments, got {xi.shape[-1]}"
        )
    out = np.ones(xi.shape[:-1])
    for i, ai in enumerate(a):
        if ai:
            out = out * eval_normalized(ai, xi[..., i])
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss quadrature against the standard normal density."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Order-q rule; exact for polynomials of degree <= 2q-1 against phi.

    Nodes come from the symmetric tridiagonal eigenproblem for the
    probabilists' weight; weights are renormalized to sum to 1.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    nodes, weights = special.roots_hermitenorm(order)
    weights = weights / math.sqrt(2.0 * math.pi)
    return QuadratureRule(nodes=nodes, weights=weights)


def normal_pdf(x) -> float:
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 2.0) / math.sqrt(2.0 * math.pi)


def normal_sf(x) -> float:
    """P(Z > x) for Z standard normal."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def hermite_indicator_integral(m: int, threshold: float) -> float:
    """Half-line integral of H_m against phi over [threshold, infinity).

    For m >= 1 the closed form phi(K) H_{m-1}(K) / sqrt(m) applies; for m = 0
    the integral is the normal survival function.  Discontinuous payoffs get
    their chaos coefficients from here, never from quadrature across the jump.
    """
    if m < 0:
        raise ValueError("Hermite order must be non-negative")
    if m == 0:
        return normal_sf(threshold)
    return float(normal_pdf(threshold)) * eval_normalized(m - 1, threshold) / math.sqrt(m)
