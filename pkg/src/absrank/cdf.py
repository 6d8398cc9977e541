"""Absolute-rank functions.

An absolute-rank function maps a metric value ``t`` to the probability that
uniform random search (the same budget ``c`` and rounds ``r`` as the
algorithms under test) achieves a metric no worse than ``t``. All kinds share
the :class:`AbsRankFn` interface: call the object on a scalar or an array.

Kinds
-----
analytic-sphere    ball volume over box volume, exact while the ball fits
analytic-cone      ``((t - y_min) / (y_max - y_min)) ** d``
analytic-uniform   max-min scaling
analytic-gaussian  normal CDF
empirical          piecewise-linear interpolation of sorted samples with
                   exponential tails
budget-composed    minimum of ``c`` independent draws
rounds-composed    mean of ``r`` independent per-round minima
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, TextIO

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft
from scipy.special import ndtr

from .errors import CapabilityError, DomainError, FormatError, ParseError, SizeError

__all__ = [
    "AbsRankFn",
    "SphereCDF",
    "ConeCDF",
    "UniformCDF",
    "GaussianCDF",
    "EmpiricalCDF",
    "BudgetCDF",
    "RoundsCDF",
    "cdf_sphere",
    "cdf_cone",
    "cdf_uniform",
    "cdf_gaussian",
    "empirical_cdf",
    "compose_budget",
    "compose_rounds",
    "evaluate",
    "save_cdf",
    "load_cdf",
    "cdf_to_dict",
    "cdf_from_dict",
    "FORMAT_VERSION",
]

FORMAT_VERSION = 1


class AbsRankFn:
    """Base class: a non-decreasing map from metric values into ``[0, 1]``."""

    kind: str = ""
    metadata: dict

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.isnan(arr).any():
            raise DomainError("cannot evaluate an absolute rank at NaN")
        out = np.clip(self._eval(np.atleast_1d(arr)), 0.0, 1.0).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        """Smallest interval outside which the function is 0 or 1 (may be infinite)."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "params": self.params(),
            "metadata": dict(self.metadata),
        }

    def quantile(self, q: float, tol: float = 1e-12) -> float:
        """Smallest ``t`` with ``v(t) >= q``, located by bisection."""
        lo, hi = self.support()
        if not math.isfinite(lo):
            lo = -1.0 if not math.isfinite(hi) else hi - 1.0
            step = 1.0
            while self(lo) >= q:
                step *= 2.0
                lo -= step
        if not math.isfinite(hi):
            hi = lo + 1.0
            step = 1.0
            while self(hi) < q:
                step *= 2.0
                hi += step
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self(mid) >= q:
                hi = mid
            else:
                lo = mid
            if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
                break
        return hi


def evaluate(v: AbsRankFn, t):
    """Absolute rank of metric value(s) ``t`` under ``v``."""
    return v(t)


def _check_positive_int(x, name: str) -> int:
    if int(x) != x or x < 1:
        raise DomainError(f"{name} must be a positive integer")
    return int(x)


# --------------------------------------------------------------------------
# analytic kinds


@dataclass(frozen=True, eq=False)
class SphereCDF(AbsRankFn):
    """``f(x) = sum(x_i^2)`` with uniform sampling on ``[-w, w]^d``.

    The closed form (ball volume over box volume) is exact while the ball of
    radius ``sqrt(t)`` stays inside the box, i.e. for ``t < w^2``. Past that
    crossover two continuations are available:

    ``overflow="convolution"``
        The true CDF. ``sum(x_i^2)`` is a sum of ``d`` independent copies of
        ``x^2`` whose bin masses on a ``grid``-bin partition of ``[0, w^2]``
        are exact, so a ``d``-fold FFT convolution gives the CDF to within
        the bin width. It is rescaled to join the closed form at the
        crossover and to reach 1 at the corner value ``d * w^2``.
    ``overflow="formula"``
        Keep using the closed form (clamped to 1). It overestimates because
        the part of the ball outside the box is still counted.
    """

    d: int
    w: float
    overflow: str = "convolution"
    grid: int = 1 << 14
    metadata: dict = field(default_factory=dict)
    kind = "analytic-sphere"

    @property
    def crossover(self) -> float:
        return self.w * self.w

    @cached_property
    def _log_norm(self) -> float:
        return self.d * math.log(2.0 * self.w) + math.lgamma(self.d / 2.0 + 1.0)

    @cached_property
    def crossover_value(self) -> float:
        d = self.d
        return math.exp(d / 2.0 * math.log(math.pi) - d * math.log(2.0) - math.lgamma(d / 2.0 + 1.0))

    def _closed_form(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(self.d / 2.0 * np.log(math.pi * t[pos]) - self._log_norm)
        return out

    @cached_property
    def _overflow_table(self) -> tuple[np.ndarray, np.ndarray]:
        G, d = self.grid, self.d
        k = np.arange(G + 1, dtype=float)
        masses = np.diff(np.sqrt(k / G))  # P(x^2 in bin) for x ~ U(-w, w)
        L = d * (G - 1) + 1
        nfft = next_fast_len(L, real=True)
        dist = irfft(rfft(masses, nfft) ** d, nfft)[:L]
        np.clip(dist, 0.0, None, out=dist)
        dist /= dist.sum()
        h = self.crossover / G
        centers = h * (np.arange(L) + d / 2.0)
        cdf = np.cumsum(dist) - 0.5 * dist
        xs = np.concatenate(([0.0], centers, [d * self.crossover]))
        ys = np.concatenate(([0.0], cdf, [1.0]))
        return xs, ys

    def _eval(self, t: np.ndarray) -> np.ndarray:
        if (t < 0).any():
            raise DomainError("sphere absolute rank is undefined for t < 0")
        if self.overflow == "formula" or self.d == 1:
            return np.minimum(self._closed_form(t), 1.0)
        out = np.ones_like(t)
        inner = t < self.crossover
        out[inner] = self._closed_form(t[inner])
        outer = (~inner) & (t < self.d * self.crossover)
        if outer.any():
            xs, ys = self._overflow_table
            e0 = np.interp(self.crossover, xs, ys)
            frac = (np.interp(t[outer], xs, ys) - e0) / (1.0 - e0)
            c = self.crossover_value
            out[outer] = c + (1.0 - c) * np.clip(frac, 0.0, 1.0)
        return out

    def support(self) -> tuple[float, float]:
        if self.overflow == "formula":
            hi = math.exp((self._log_norm) * 2.0 / self.d) / math.pi
            return (0.0, hi)
        return (0.0, self.d * self.w * self.w)

    def params(self) -> dict:
        return {
            "d": self.d,
            "w": self.w,
            "overflow": self.overflow,
            "grid": self.grid,
            "crossover": self.crossover,
        }


_OVERFLOW_MODES = ("convolution", "formula")


def cdf_sphere(d: int, w: float, overflow: str = "convolution", grid: int = 1 << 14, **metadata) -> SphereCDF:
    d = _check_positive_int(d, "dimension")
    if not w > 0:
        raise DomainError("half-width w must be positive")
    if overflow not in _OVERFLOW_MODES:
        raise DomainError(f"overflow must be one of {_OVERFLOW_MODES}")
    if grid < 256:
        raise DomainError("overflow grid must have at least 256 bins")
    metadata.setdefault("crossover", w * w)
    return SphereCDF(d, float(w), overflow, int(grid), metadata)


@dataclass(frozen=True, eq=False)
class ConeCDF(AbsRankFn):
    d: int
    y_min: float
    y_max: float
    metadata: dict = field(default_factory=dict)
    kind = "analytic-cone"

    def _eval(self, t: np.ndarray) -> np.ndarray:
        u = np.clip((t - self.y_min) / (self.y_max - self.y_min), 0.0, 1.0)
        return u**self.d

    def support(self) -> tuple[float, float]:
        return (self.y_min, self.y_max)

    def params(self) -> dict:
        return {"d": self.d, "y_min": self.y_min, "y_max": self.y_max}


def cdf_cone(d: int, y_min: float, y_max: float, **metadata) -> ConeCDF:
    d = _check_positive_int(d, "dimension")
    if not y_min < y_max:
        raise DomainError("cone CDF needs y_min < y_max")
    return ConeCDF(d, float(y_min), float(y_max), metadata)


@dataclass(frozen=True, eq=False)
class UniformCDF(AbsRankFn):
    y_min: float
    y_max: float
    metadata: dict = field(default_factory=dict)
    kind = "analytic-uniform"

    def _eval(self, t: np.ndarray) -> np.ndarray:
        return np.clip((t - self.y_min) / (self.y_max - self.y_min), 0.0, 1.0)

    def support(self) -> tuple[float, float]:
        return (self.y_min, self.y_max)

    def params(self) -> dict:
        return {"y_min": self.y_min, "y_max": self.y_max}


def cdf_uniform(y_min: float, y_max: float, **metadata) -> UniformCDF:
    if not y_min < y_max:
        raise DomainError("uniform CDF needs y_min < y_max")
    return UniformCDF(float(y_min), float(y_max), metadata)


@dataclass(frozen=True, eq=False)
class GaussianCDF(AbsRankFn):
    mu: float
    sigma: float
    metadata: dict = field(default_factory=dict)
    kind = "analytic-gaussian"

    def _eval(self, t: np.ndarray) -> np.ndarray:
        return ndtr((t - self.mu) / self.sigma)

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def params(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma}


def cdf_gaussian(mu: float, sigma: float, **metadata) -> GaussianCDF:
    if not sigma > 0 or not math.isfinite(mu):
        raise DomainError("Gaussian CDF needs finite mu and sigma > 0")
    return GaussianCDF(float(mu), float(sigma), metadata)


# --------------------------------------------------------------------------
# empirical kind


@dataclass(frozen=True, eq=False)
class EmpiricalCDF(AbsRankFn):
    """Sample-based absolute rank.

    ``knots`` are the distinct sorted sample values and ``cumulative`` the
    number of samples ``<= knot``; the level of a knot is
    ``cumulative / (n_samples + 1)``. Between knots the function is linear.
    Below the first knot it decays as ``exp(t - y_1)`` times the first level
    (or runs linearly to 0 at ``known_min``); above the last knot it follows
    ``1 - exp(-ln(N + 1) * t / y_N)`` (or runs linearly to 1 at ``known_max``).
    The upper tail is applied in coordinates shifted by ``y_1`` when
    ``y_N <= 0``, where the unshifted form would not increase.
    """

    knots: np.ndarray
    cumulative: np.ndarray
    n_samples: int
    known_min: float | None = None
    known_max: float | None = None
    metadata: dict = field(default_factory=dict)
    kind = "empirical"

    def __post_init__(self) -> None:
        for a in (self.knots, self.cumulative):
            a.setflags(write=False)

    @cached_property
    def levels(self) -> np.ndarray:
        return self.cumulative / (self.n_samples + 1.0)

    @property
    def tail_origin(self) -> float:
        return 0.0 if self.knots[-1] > 0 else float(self.knots[0])

    def _upper_tail(self, t: np.ndarray) -> np.ndarray:
        o = self.tail_origin
        # a subnormal y_N overflows the rate; the limit is a step to 1
        with np.errstate(over="ignore", invalid="ignore"):
            rate = math.log(self.n_samples + 1.0) / (self.knots[-1] - o)
            out = -np.expm1(-rate * (t - o))
        return np.where(np.isnan(out), 1.0, out)

    @property
    def upper_tail_gap(self) -> float:
        """Jump between the last knot level and the upper tail at ``y_N``."""
        return float(abs(self._upper_tail(self.knots[-1:])[0] - self.levels[-1]))

    def _eval(self, t: np.ndarray) -> np.ndarray:
        y, L = self.knots, self.levels
        out = np.interp(t, y, L)
        below = t < y[0]
        if below.any():
            tb = t[below]
            if self.known_min is None:
                out[below] = L[0] * np.exp(tb - y[0])
            elif self.known_min == y[0]:
                out[below] = 0.0
            else:
                out[below] = np.clip(L[0] * (tb - self.known_min) / (y[0] - self.known_min), 0.0, None)
        above = t > y[-1]
        if above.any():
            ta = t[above]
            if self.known_max is None:
                out[above] = self._upper_tail(ta)
            elif self.known_max == y[-1]:
                out[above] = 1.0
            else:
                frac = np.clip((ta - y[-1]) / (self.known_max - y[-1]), None, 1.0)
                out[above] = L[-1] + (1.0 - L[-1]) * frac
        return out

    def support(self) -> tuple[float, float]:
        lo = -math.inf if self.known_min is None else self.known_min
        hi = math.inf if self.known_max is None else self.known_max
        return (lo, hi)

    def params(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "known_min": self.known_min,
            "known_max": self.known_max,
        }

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["knots"] = {
            "values": [float(x) for x in self.knots],
            "cumulative": [int(c) for c in self.cumulative],
        }
        return d


def empirical_cdf(
    samples,
    known_min: float | None = None,
    known_max: float | None = None,
    **metadata,
) -> EmpiricalCDF:
    """Build the sample-based absolute rank from function values.

    Duplicated values collapse into one knot carrying the highest tied level,
    which keeps the function strictly increasing.
    """
    y = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise ParseError("samples must be finite")
    y = np.sort(y)
    knots, counts = np.unique(y, return_counts=True)
    if knots.size < 2:
        raise SizeError("need at least 2 distinct sample values")
    if known_min is not None and known_min > knots[0]:
        raise DomainError(f"known_min {known_min} exceeds the smallest sample {knots[0]}")
    if known_max is not None and known_max < knots[-1]:
        raise DomainError(f"known_max {known_max} is below the largest sample {knots[-1]}")
    metadata.setdefault("n_samples", int(y.size))
    v = EmpiricalCDF(
        knots,
        np.cumsum(counts),
        int(y.size),
        None if known_min is None else float(known_min),
        None if known_max is None else float(known_max),
        metadata,
    )
    v.metadata.setdefault("upper_tail_gap", v.upper_tail_gap)
    return v


# --------------------------------------------------------------------------
# composition over budget and rounds


@dataclass(frozen=True, eq=False)
class BudgetCDF(AbsRankFn):
    """CDF of the best of ``c`` independent draws from ``base``."""

    base: AbsRankFn
    c: int
    metadata: dict = field(default_factory=dict)
    kind = "budget-composed"

    def _eval(self, t: np.ndarray) -> np.ndarray:
        v = np.clip(self.base._eval(t), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            return -np.expm1(self.c * np.log1p(-v))

    def support(self) -> tuple[float, float]:
        return self.base.support()

    def params(self) -> dict:
        return {"c": self.c, "base": self.base.to_dict()}


def compose_budget(v1: AbsRankFn, c: int, **metadata) -> AbsRankFn:
    """Absolute rank for a budget of ``c`` evaluations per run."""
    c = _check_positive_int(c, "budget c")
    if c == 1:
        return v1
    return BudgetCDF(v1, c, metadata)


_MOMENT_GRID = 1 << 15


@dataclass(frozen=True, eq=False)
class RoundsCDF(AbsRankFn):
    """CDF of the mean of ``r`` independent draws from ``base``.

    ``mode="convolution"`` discretizes ``base`` into ``grid`` equal-width bins
    over its support, raises the bin-mass spectrum to the ``r``-th power (the
    ``r - 1`` fold self-convolution) and interpolates the resulting CDF of the
    mean at the bin centers. ``mode="normal-approx"`` uses a Gaussian with the
    mean of ``base`` and its variance divided by ``r``.
    """

    base: AbsRankFn
    r: int
    mode: str = "convolution"
    grid: int = 2048
    metadata: dict = field(default_factory=dict)
    kind = "rounds-composed"

    def _effective_range(self) -> tuple[float, float]:
        lo, hi = self.base.support()
        if not math.isfinite(lo):
            lo = self.base.quantile(1e-15)
        if not math.isfinite(hi):
            hi = self.base.quantile(1.0 - 1e-15)
        return lo, hi

    @cached_property
    def moments(self) -> tuple[float, float]:
        """Mean and variance of a single draw from ``base``."""
        lo, hi = self._effective_range()
        edges = np.linspace(lo, hi, _MOMENT_GRID + 1)
        F = self.base(edges)
        m = np.diff(F)
        m[0] += F[0]
        m /= m.sum()
        centers = 0.5 * (edges[1:] + edges[:-1])
        mu = float(np.dot(m, centers))
        var = float(np.dot(m, (centers - mu) ** 2))
        return mu, var

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.support()
        G, r = self.grid, self.r
        edges = np.linspace(lo, hi, G + 1)
        F = self.base(edges)
        m = np.diff(F)
        m[0] += F[0]
        m /= m.sum()
        L = r * (G - 1) + 1
        nfft = next_fast_len(L, real=True)
        dist = irfft(rfft(m, nfft) ** r, nfft)[:L]
        np.clip(dist, 0.0, None, out=dist)
        dist /= dist.sum()
        h = (hi - lo) / G
        centers = lo + h * (np.arange(L) + r / 2.0) / r
        cdf = np.cumsum(dist) - 0.5 * dist
        xs = np.concatenate(([lo], centers, [hi]))
        ys = np.concatenate(([0.0], cdf, [1.0]))
        return xs, ys

    def _eval(self, t: np.ndarray) -> np.ndarray:
        if self.mode == "normal-approx":
            mu, var = self.moments
            if var <= 0:
                return (t >= mu).astype(float)
            return ndtr((t - mu) / math.sqrt(var / self.r))
        xs, ys = self._table
        return np.interp(t, xs, ys, left=0.0, right=1.0)

    def support(self) -> tuple[float, float]:
        if self.mode == "normal-approx":
            return (-math.inf, math.inf)
        return self.base.support()

    def params(self) -> dict:
        return {"r": self.r, "mode": self.mode, "grid": self.grid, "base": self.base.to_dict()}


_ROUND_MODES = ("convolution", "normal-approx")


def compose_rounds(
    vc: AbsRankFn, r: int, mode: str = "convolution", grid: int = 2048, **metadata
) -> AbsRankFn:
    """Absolute rank of the metric averaged over ``r`` rounds."""
    r = _check_positive_int(r, "rounds r")
    if mode not in _ROUND_MODES:
        raise DomainError(f"mode must be one of {_ROUND_MODES}")
    if r == 1:
        return vc
    if mode == "convolution":
        if grid < 256:
            raise DomainError("convolution grid must have at least 256 bins")
        lo, hi = vc.support()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise CapabilityError(
                "convolution needs a bounded support; use mode='normal-approx' "
                "or give the empirical CDF known bounds"
            )
    return RoundsCDF(vc, r, mode, int(grid), metadata)


# --------------------------------------------------------------------------
# serialization


def cdf_to_dict(v: AbsRankFn) -> dict:
    return v.to_dict()


def _req(d: dict, key: str) -> Any:
    try:
        return d[key]
    except (KeyError, TypeError):
        raise FormatError(f"absolute-rank payload is missing {key!r}") from None


def cdf_from_dict(d: dict) -> AbsRankFn:
    if not isinstance(d, dict):
        raise FormatError("absolute-rank payload must be a JSON object")
    version = _req(d, "version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported absolute-rank format version {version!r}")
    kind = _req(d, "kind")
    p = _req(d, "params")
    meta = dict(d.get("metadata") or {})
    try:
        if kind == "analytic-sphere":
            return SphereCDF(int(p["d"]), float(p["w"]), p["overflow"], int(p["grid"]), meta)
        if kind == "analytic-cone":
            return ConeCDF(int(p["d"]), float(p["y_min"]), float(p["y_max"]), meta)
        if kind == "analytic-uniform":
            return UniformCDF(float(p["y_min"]), float(p["y_max"]), meta)
        if kind == "analytic-gaussian":
            return GaussianCDF(float(p["mu"]), float(p["sigma"]), meta)
        if kind == "empirical":
            knots = _req(d, "knots")
            values = np.array(knots["values"], dtype=float)
            cumulative = np.array(knots["cumulative"], dtype=np.int64)
            if values.size < 2 or values.shape != cumulative.shape or np.any(np.diff(values) <= 0):
                raise FormatError("empirical knots are malformed")
            return EmpiricalCDF(
                values, cumulative, int(p["n_samples"]), p.get("known_min"), p.get("known_max"), meta
            )
        if kind == "budget-composed":
            return BudgetCDF(cdf_from_dict(p["base"]), int(p["c"]), meta)
        if kind == "rounds-composed":
            return RoundsCDF(cdf_from_dict(p["base"]), int(p["r"]), p["mode"], int(p["grid"]), meta)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed {kind} payload: {exc}") from None
    raise FormatError(f"unknown absolute-rank kind {kind!r}")


def save_cdf(v: AbsRankFn, sink: TextIO | str | os.PathLike) -> None:
    """Write ``v`` as versioned JSON (conventionally ``<problem>.absrank.json``)."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            save_cdf(v, fh)
        return
    json.dump(v.to_dict(), sink)
    sink.write("\n")


def load_cdf(source: TextIO | str | os.PathLike) -> AbsRankFn:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_cdf(fh)
    try:
        payload = json.load(source)
    except json.JSONDecodeError as exc:
        raise FormatError(f"corrupt absolute-rank file: {exc}") from None
    return cdf_from_dict(payload)
