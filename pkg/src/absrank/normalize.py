"""Column-wise normalizations of a performance matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.stats import rankdata

from .cdf import AbsRankFn
from .core import PerformanceMatrix
from .errors import DegenerateScaleError, NotFoundError

__all__ = [
    "RankMatrix",
    "rank_normalize",
    "max_min_scale",
    "z_score",
    "absolute_normalize",
]


@dataclass(frozen=True, eq=False)
class RankMatrix:
    """Within-column ranks: 1 for the best (lowest) value, ``n`` for the worst.

    Tied values share the mean of the positions they occupy, so every column
    sums to ``n(n+1)/2``.
    """

    algorithms: tuple[str, ...]
    problems: tuple[str, ...]
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.algorithms)

    @property
    def p(self) -> int:
        return len(self.problems)

    def rank_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def average_ranks(self) -> dict[str, float]:
        return dict(zip(self.algorithms, (self.rank_sums() / self.p).tolist()))


def rank_normalize(M: PerformanceMatrix) -> RankMatrix:
    ranks = rankdata(M.loss, method="average", axis=0)
    ranks.setflags(write=False)
    return RankMatrix(M.algorithms, M.problems, ranks)


def max_min_scale(column) -> np.ndarray:
    x = np.asarray(column, dtype=float)
    lo, hi = x.min(), x.max()
    if hi == lo:
        raise DegenerateScaleError("max-min scaling of a constant column")
    return (x - lo) / (hi - lo)


def z_score(column) -> np.ndarray:
    """Standardize with the population standard deviation (``ddof=0``)."""
    x = np.asarray(column, dtype=float)
    sigma = x.std()
    if sigma == 0:
        raise DegenerateScaleError("z-score of a column with zero deviation")
    return (x - x.mean()) / sigma


def absolute_normalize(M: PerformanceMatrix, cdfs: Mapping[str, AbsRankFn]) -> PerformanceMatrix:
    """Replace each entry by its absolute rank under its problem's CDF.

    Each entry depends on its own cell only, so the result commutes with
    row projection. For a higher-is-better matrix the CDFs describe the raw
    metric and the entry becomes ``1 - v(t)``; the output is always
    lower-is-better.
    """
    missing = [p for p in M.problems if p not in cdfs]
    if missing:
        raise NotFoundError(f"no absolute-rank function for problem(s) {missing}")
    V = np.empty_like(M.values)
    for j, problem in enumerate(M.problems):
        V[:, j] = cdfs[problem](M.values[:, j])
    if not M.lower_is_better:
        V = 1.0 - V
    return PerformanceMatrix(M.algorithms, M.problems, V, lower_is_better=True)
