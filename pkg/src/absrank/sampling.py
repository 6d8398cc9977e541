"""Function sampling over a box and choice of the sampling range."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .bench import BenchmarkProblem, evaluate_many
from .cdf import EmpiricalCDF, empirical_cdf
from .errors import DomainError, FormatError, ShapeError
from .sobol import SobolConfig, sobol_points

__all__ = [
    "SampleSet",
    "DeltaSelection",
    "sample_function",
    "geometric_mean_difference",
    "hypercube",
    "select_delta",
    "save_samples",
    "load_samples",
]

log = logging.getLogger(__name__)

COARSE_LOG2N = 15
FINE_LOG2N = 20


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sorted function values from one sampling run."""

    problem: str
    region: np.ndarray
    cfg: SobolConfig
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ShapeError("sample values must be one-dimensional")
        if v.size > 1 and np.any(np.diff(v) < 0):
            v = np.sort(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "region", np.asarray(self.region, dtype=float).reshape(2, -1))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def to_cdf(self, known_min: float | None = None, known_max: float | None = None) -> EmpiricalCDF:
        return empirical_cdf(
            self.values,
            known_min,
            known_max,
            problem=self.problem,
            sobol=self.cfg.to_dict(),
        )

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "region": {"lo": self.region[0].tolist(), "hi": self.region[1].tolist()},
            "cfg": self.cfg.to_dict(),
            "values": self.values.tolist(),
        }


def save_samples(s: SampleSet, sink: TextIO | str | os.PathLike) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            json.dump(s.to_dict(), fh)
        return
    json.dump(s.to_dict(), sink)


def load_samples(source: TextIO | str | os.PathLike) -> SampleSet:
    try:
        if isinstance(source, (str, os.PathLike)):
            with open(source, encoding="utf-8") as fh:
                d = json.load(fh)
        else:
            d = json.load(source)
        return SampleSet(
            str(d["problem"]),
            np.array([d["region"]["lo"], d["region"]["hi"]], dtype=float),
            SobolConfig.from_dict(d["cfg"]),
            np.asarray(d["values"], dtype=float),
        )
    except json.JSONDecodeError as exc:
        raise FormatError(f"corrupt samples file: {exc}") from None
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed samples file: {exc}") from None


def _as_region(problem: BenchmarkProblem, region) -> np.ndarray:
    R = np.asarray(region, dtype=float)
    if R.shape == (2,):
        R = np.repeat(R[:, None], problem.d, axis=1)
    if R.shape != (2, problem.d):
        raise ShapeError(f"region must be (lo, hi) pairs for {problem.d} coordinates")
    if not np.all(R[0] < R[1]):
        raise DomainError("region needs lo < hi in every coordinate")
    return R


def sample_function(problem: BenchmarkProblem, region, cfg: SobolConfig, chunk: int = 1 << 16) -> SampleSet:
    """Evaluate ``problem`` at Sobol points mapped affinely onto ``region``.

    ``region`` is ``(lo, hi)`` either as two scalars (same interval in every
    coordinate) or as two length-``d`` vectors. It must lie inside the
    problem domain.
    """
    R = _as_region(problem, region)
    if np.any(R[0] < problem.lo) or np.any(R[1] > problem.hi):
        raise DomainError("sampling region extends outside the problem domain")
    if cfg.dim != problem.d:
        raise DomainError(f"sampler dimension {cfg.dim} does not match problem dimension {problem.d}")
    U = sobol_points(cfg)
    span = R[1] - R[0]
    out = np.empty(U.shape[0])
    for start in range(0, U.shape[0], chunk):
        X = R[0] + U[start : start + chunk] * span
        # guard against rounding just past hi
        np.minimum(X, R[1], out=X)
        out[start : start + chunk] = evaluate_many(problem, X)
    out.sort()
    return SampleSet(problem.label, R, cfg, out)


def geometric_mean_difference(vals) -> float:
    """Geometric mean of the gaps between sorted distinct values.

    A single distinct value scores 0.
    """
    v = np.unique(np.asarray(vals, dtype=float).ravel())
    if v.size == 0:
        raise DomainError("geometric mean difference of an empty set")
    if v.size == 1:
        return 0.0
    return float(np.exp(np.log(np.diff(v)).mean()))


def hypercube(problem: BenchmarkProblem, x_star, delta: float) -> tuple[np.ndarray, bool]:
    """``[x* - delta, x* + delta]^d`` clipped to the domain, plus a clipped flag."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    x = np.broadcast_to(np.asarray(x_star, dtype=float), (problem.d,))
    if not problem.contains(x):
        raise DomainError("x_star lies outside the problem domain")
    lo, hi = x - delta, x + delta
    clo, chi = np.maximum(lo, problem.lo), np.minimum(hi, problem.hi)
    clipped = bool(np.any(clo != lo) or np.any(chi != hi))
    return np.vstack([clo, chi]), clipped


@dataclass(frozen=True)
class DeltaSelection:
    problem: str
    deltas: tuple[float, ...]
    scores: tuple[float, ...]
    clipped: tuple[bool, ...]
    best: float
    ranks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "deltas": list(self.deltas),
            "scores": list(self.scores),
            "clipped": list(self.clipped),
            "best": self.best,
        }


def select_delta(
    problem: BenchmarkProblem,
    x_star,
    metric_col: Sequence[float],
    deltas: Sequence[float],
    coarse_cfg: SobolConfig | None = None,
) -> DeltaSelection:
    """Score each candidate half-width by the spread it gives the metric values.

    For each ``delta`` the hypercube around ``x_star`` is sampled, an empirical
    absolute rank is built from the samples, the metric values are mapped
    through it and the result is scored with the geometric mean difference.
    The highest score wins; ties go to the smallest ``delta``.
    """
    deltas = tuple(float(d) for d in deltas)
    if not deltas:
        raise DomainError("need at least one candidate delta")
    metrics = np.asarray(metric_col, dtype=float)
    if metrics.size == 0:
        raise DomainError("need at least one metric value")
    if coarse_cfg is None:
        coarse_cfg = SobolConfig(dim=problem.d, log2n=COARSE_LOG2N)
    scores, flags, ranks = [], [], {}
    for delta in deltas:
        region, clipped = hypercube(problem, x_star, delta)
        if clipped:
            log.warning("hypercube of half-width %g clipped to the domain of %s", delta, problem.label)
        v = sample_function(problem, region, coarse_cfg).to_cdf()
        r = v(metrics)
        ranks[delta] = np.atleast_1d(r)
        scores.append(geometric_mean_difference(r))
        flags.append(clipped)
    order = sorted(range(len(deltas)), key=lambda i: (-scores[i], deltas[i]))
    return DeltaSelection(problem.label, deltas, tuple(scores), tuple(flags), deltas[order[0]], ranks)
