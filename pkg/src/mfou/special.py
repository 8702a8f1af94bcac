"""Incomplete-gamma helpers for the cross-covariance quadrature.

The closed-form reduction of the model's inner covariance integral needs the
(non-regularized) upper incomplete gamma function at first arguments in
(-1, 1) \\ {0}, where scipy's regularized ``gammaincc`` is unavailable or
loses the normalization.  The negative range is reached through one step of
the downward recurrence

    Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a,

anchored on scipy's evaluation for a + 1 in (0, 2).  An exponentially scaled
variant (stable for large x) and the entire series

    W_a(x) = sum_{n>=0} (-x)^n / (n! (a + n)) = x^{-a} gamma_lower(a, x)

round out what the covariance module consumes.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

__all__ = ["upper_gamma", "scaled_upper_gamma", "power_series_lower_gamma"]

_SERIES_MAX_TERMS = 80
_CF_ITERATIONS = 80
_CF_SWITCH = 30.0


def _check_order(a: float) -> float:
    a = float(a)
    if a == 0.0 or not -1.0 < a < 1.0:
        raise ValueError(f"first argument must lie in (-1, 1) excluding 0, got {a}")
    return a


def upper_gamma(a: float, x) -> np.ndarray:
    """Generalized upper incomplete gamma Gamma(a, x) for a in (-1, 1) \\ {0}, x > 0."""
    a = _check_order(a)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("x must be strictly positive")
    if a > 0.0:
        return gamma_fn(a) * gammaincc(a, x)
    ap1 = a + 1.0
    return (gamma_fn(ap1) * gammaincc(ap1, x) - x**a * np.exp(-x)) / a


def scaled_upper_gamma(a: float, x) -> np.ndarray:
    """e^x * Gamma(a, x) for a in (-1, 1) \\ {0}, x > 0, stable for large x.

    Below ``x = 30`` the direct product is exact; above, the Legendre
    continued fraction (modified Lentz evaluation) avoids the 0 * inf of the
    plain product.
    """
    a = _check_order(a)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x1 = np.atleast_1d(x)
    out = np.empty_like(x1)
    small = x1 <= _CF_SWITCH
    if small.any():
        out[small] = np.exp(x1[small]) * upper_gamma(a, x1[small])
    if (~small).any():
        xl = x1[~small]
        out[~small] = xl**a / _lentz_cf(a, xl)
    return out[0] if scalar else out


def _lentz_cf(a: float, x: np.ndarray) -> np.ndarray:
    # Gamma(a, x) = e^{-x} x^a / CF with
    # CF = x + 1 - a - 1(1-a)/(x + 3 - a - 2(2-a)/(x + 5 - a - ...))
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / np.where(np.abs(b) < tiny, tiny, b)
    h = d.copy()
    for i in range(1, _CF_ITERATIONS + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return 1.0 / h


def power_series_lower_gamma(a: float, x) -> np.ndarray:
    """W_a(x) = x^{-a} gamma_lower(a, x), entire in x, for a in (-1, 1) \\ {0}.

    Small x uses the power series; larger x the upper-gamma complement.
    Neither branch cancels: for a < 0, Gamma(a) < 0 < Gamma(a, x), and for
    a > 0 the complement is a difference of same-sign terms bounded away
    from each other on x >= 1.
    """
    a = _check_order(a)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("x must be non-negative")
    scalar = x.ndim == 0
    x1 = np.atleast_1d(x)
    out = np.empty_like(x1)
    small = x1 < 1.0
    if small.any():
        xs = x1[small]
        term = np.full_like(xs, 1.0 / a)
        acc = term.copy()
        for n in range(1, _SERIES_MAX_TERMS + 1):
            term = term * (-xs) * (a + n - 1.0) / (n * (a + n))
            acc += term
            if np.all(np.abs(term) <= 1e-17 * (np.abs(acc) + 1e-300)):
                break
        out[small] = acc
    if (~small).any():
        xl = x1[~small]
        out[~small] = xl ** (-a) * (gamma_fn(a) - upper_gamma(a, xl))
    return out[0] if scalar else out
