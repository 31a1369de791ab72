"""Legendre algebra on [-1, 1]: evaluation, Fourier-Legendre projection,
the exact moment-to-coefficient map, and the checkable bounds used by the
reconstruction estimates.

Coefficients are always taken against the L2-normalized polynomials
``Pt_n = P_n / ||P_n||_2`` with ``||P_n||_2^2 = 2/(2n+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import gauss_nodes

__all__ = [
    "MomentVector",
    "LegendreSeries",
    "legendre_poly",
    "legendre_poly_explicit",
    "normalized_legendre",
    "fl_coefficients",
    "moments_to_coefficients",
    "series_eval",
    "coefficient_bound_check",
    "tail_bound",
    "normalized_sup_bound",
    "UNIFORM_HALF_INTERVAL_BOUND",
]

MOMENT_MAP_N_CAP = 40
UNIFORM_HALF_INTERVAL_BOUND = 2.0**0.25 * math.sqrt(3.0 / math.pi)


@dataclass
class MomentVector:
    """Moments ``m_k = int_{-1}^1 x^k g(x) dx`` for k = 0..N."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("moments must be finite")

    @property
    def order(self) -> int:
        return self.values.size - 1


@dataclass
class LegendreSeries:
    """Coefficients against the L2-normalized Legendre polynomials."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return series_eval(self.coeffs, x)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def legendre_poly(n: int, x):
    """``P_n(x)`` by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.shape else float(p_prev)
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p if p.shape else float(p)


def legendre_poly_explicit(n: int, x):
    """``P_n`` by the explicit alternating sum; cross-validation only."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for k in range(n // 2 + 1):
        acc += (-1) ** k * math.comb(n, k) * math.comb(2 * n - 2 * k, n) \
            * x ** (n - 2 * k)
    out = acc / 2**n
    return out if out.shape else float(out)


def normalized_legendre(n: int, x):
    return legendre_poly(n, x) * math.sqrt((2 * n + 1) / 2.0)


def fl_coefficients(g, N: int, n_nodes: int = 0) -> LegendreSeries:
    """Fourier-Legendre coefficients of a callable by Gauss quadrature."""
    if n_nodes == 0:
        n_nodes = max(4 * N + 40, 160)
    t, w = gauss_nodes(n_nodes)
    gv = np.asarray(g(t), dtype=float)
    coeffs = np.empty(N + 1)
    p_prev = np.ones_like(t)
    p = t.copy()
    for n in range(N + 1):
        if n == 0:
            pn = p_prev
        elif n == 1:
            pn = p
        else:
            p, p_prev = ((2 * (n - 1) + 1) * t * p - (n - 1) * p_prev) / n, p
            pn = p
        coeffs[n] = math.sqrt((2 * n + 1) / 2.0) * np.sum(w * gv * pn)
    return LegendreSeries(coeffs)


def parseval_defect(g, series: LegendreSeries, n_nodes: int = 400) -> float:
    t, w = gauss_nodes(n_nodes)
    gv = np.asarray(g(t), dtype=float)
    return abs(float(np.sum(w * gv * gv)) - float(np.sum(series.coeffs**2)))


def moments_to_coefficients(m: MomentVector) -> LegendreSeries:
    """Exact linear map: ``a_n = sqrt((2n+1)/2) * 2^-n *
    sum_k (-1)^k C(n,k) C(2n-2k,n) m_{n-2k}``.

    Conditioning grows like ``(4 sqrt 2)^n``; capped at N = 40.
    """
    N = m.order
    if N > MOMENT_MAP_N_CAP:
        raise ValueError(f"moment map capped at N = {MOMENT_MAP_N_CAP}")
    coeffs = np.empty(N + 1)
    for n in range(N + 1):
        terms = [
            (-1) ** k * math.comb(n, k) * math.comb(2 * n - 2 * k, n)
            * m.values[n - 2 * k]
            for k in range(n // 2 + 1)
        ]
        coeffs[n] = math.sqrt((2 * n + 1) / 2.0) * math.fsum(terms) / 2**n
    return LegendreSeries(coeffs)


def series_eval(coeffs, x):
    """Evaluate ``sum_n a_n Pt_n(x)`` by the recurrence."""
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x, dtype=float)
    p_prev = np.ones_like(x)
    p = x.copy()
    for n in range(coeffs.size):
        if n == 0:
            pn = p_prev
        elif n == 1:
            pn = p
        else:
            p, p_prev = ((2 * (n - 1) + 1) * x * p - (n - 1) * p_prev) / n, p
            pn = p
        out += coeffs[n] * math.sqrt((2 * n + 1) / 2.0) * pn
    return out if out.shape else float(out)


def coefficient_bound_check(m: MomentVector, a: LegendreSeries) -> np.ndarray:
    """Per-n ratios ``|a_n| / ((4 sqrt 2)^n max_{k<=n} |m_k|)``; all <= 1."""
    if m.order != a.order:
        raise ValueError("moment vector and series order mismatch")
    ratios = np.zeros(a.order + 1)
    running = 0.0
    for n in range(a.order + 1):
        running = max(running, abs(m.values[n]))
        bound = (4.0 * math.sqrt(2.0)) ** n * running
        ratios[n] = abs(a.coeffs[n]) / bound if bound > 0 else 0.0
    return ratios


def tail_bound(N: int, alpha: float, c0: float, a0: float = 3.0) -> float:
    """Jackson-type tail: ``||g - S_N[g]||_2 <= sqrt(2) a0 c0 (2/N)^alpha``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return math.sqrt(2.0) * a0 * c0 * (2.0 / N) ** alpha


def normalized_sup_bound(n: int) -> float:
    """Bound for ``sup_{|x|<=1/2} |Pt_n|``: ``2^(1/4) sqrt((2n+1)/(pi n))``
    for n >= 1 and ``1/sqrt(2)`` for n = 0."""
    if n == 0:
        return 1.0 / math.sqrt(2.0)
    return 2.0**0.25 * math.sqrt((2 * n + 1) / (math.pi * n))
