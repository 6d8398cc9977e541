"""Log-space upper tail of the chi-square distribution.

Friedman p-values for large benchmark suites are far below the smallest
double (1e-308), so the tail is computed as ``log Q(a, x)`` where ``Q`` is
the regularized upper incomplete gamma function.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = ["log_gammaincc", "chi2_logsf"]

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 100_000


def _log_series_p(a: float, x: float) -> float:
    """log P(a, x) by the power series; converges quickly for x < a + 1."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return math.log(total) - x + a * math.log(x) - math.lgamma(a)


def _log_cf_q(a: float, x: float) -> float:
    """log Q(a, x) by the Legendre continued fraction (modified Lentz)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.log(h) - x + a * math.log(x) - math.lgamma(a)


def log_gammaincc(a: float, x: float) -> float:
    """Natural log of the regularized upper incomplete gamma ``Q(a, x)``."""
    if not a > 0:
        raise DomainError("shape parameter must be positive")
    if x < 0 or math.isnan(x):
        raise DomainError("x must be non-negative")
    if x == 0:
        return 0.0
    if a == 1.0:
        return -x
    if x < a + 1.0:
        p = math.exp(_log_series_p(a, x))
        return math.log1p(-p)
    return _log_cf_q(a, x)


def chi2_logsf(x: float, df: int) -> float:
    """Natural log of ``P(X > x)`` for ``X ~ chi2(df)``."""
    if df < 1:
        raise DomainError("degrees of freedom must be >= 1")
    if x <= 0:
        return 0.0
    return log_gammaincc(df / 2.0, x / 2.0)
