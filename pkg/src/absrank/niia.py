"""Synthetic paradox datasets and a detector for subset-dependent verdicts.

A method exhibits non-independence from irrelevant alternatives (NIIA) when
its verdict on a pair ``(A, B)`` computed on the full matrix differs from the
verdict computed on the rows of some strict subset ``E`` containing A and B.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .bayes import bt_prob, fit_bradley_terry, pairwise_wins
from .cdf import AbsRankFn
from .core import PerformanceMatrix, project
from .errors import CapabilityError, DomainError
from .normalize import absolute_normalize, rank_normalize
from .stats import DEFAULT_CONVENTION, npht_compare

__all__ = [
    "FlipReport",
    "gen_paradox_datasets",
    "pair_direction",
    "niia_check",
    "METHODS",
]

log = logging.getLogger(__name__)

METHODS = ("avg-rank", "bradley-terry", "absolute")


def gen_paradox_datasets(n_problems: int = 500, n_first: int = 100) -> tuple[PerformanceMatrix, PerformanceMatrix]:
    """The two-dataset construction: A, B, C1 alone, then with C2..C98 added.

    On the first ``n_first`` problems A scores 1, B 99, C1 100 and C_i scores
    i; on the rest A scores 99, B 98, C1 100 and C_i scores i - 1.
    """
    first = np.arange(n_problems) < n_first
    rows = {
        "A": np.where(first, 1.0, 99.0),
        "B": np.where(first, 99.0, 98.0),
        "C1": np.full(n_problems, 100.0),
    }
    for i in range(2, 99):
        rows[f"C{i}"] = np.where(first, float(i), float(i - 1))
    problems = tuple(f"I{j}" for j in range(1, n_problems + 1))
    labels = tuple(rows)
    full = PerformanceMatrix(labels, problems, np.vstack([rows[k] for k in labels]))
    return project(full, {"A", "B", "C1"}), full


@dataclass(frozen=True)
class FlipReport:
    """Verdict on ``pair`` for the full matrix and for one subset.

    Directions are ``">"`` (first of the pair better), ``"<"`` (second
    better) or ``"="`` (indeterminate).
    """

    method: str
    pair: tuple[str, str]
    subset: tuple[str, ...]
    direction_full: str
    direction_subset: str
    evidence: dict = field(default_factory=dict)

    @property
    def flipped(self) -> bool:
        return {self.direction_full, self.direction_subset} == {">", "<"}

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "pair": list(self.pair),
            "subset": list(self.subset),
            "direction_full": self.direction_full,
            "direction_subset": self.direction_subset,
            "flipped": self.flipped,
            "evidence": self.evidence,
        }


def _sign(x: float) -> str:
    return ">" if x > 0 else "<" if x < 0 else "="


def pair_direction(
    M: PerformanceMatrix,
    pair: Sequence[str],
    method: str = "avg-rank",
    *,
    cdfs: Mapping[str, AbsRankFn] | None = None,
    gated: bool = False,
    alpha: float = 0.001,
    convention: str = DEFAULT_CONVENTION,
    prior_weight: float = 0.0,
) -> tuple[str, dict]:
    """Verdict of ``method`` on ``pair`` for matrix ``M`` plus its evidence."""
    a, b = pair
    ia, ib = M.index(a), M.index(b)
    if method == "avg-rank":
        if gated:
            rep = npht_compare(M, [(a, b)], alpha, convention)
            v = rep.pairwise[0]
            return v.direction, {"avg_rank": [v.avg_rank_a, v.avg_rank_b], "cd": rep.cd}
        avg = rank_normalize(M).values.mean(axis=1)
        return _sign(avg[ib] - avg[ia]), {"avg_rank": [float(avg[ia]), float(avg[ib])]}
    if method == "bradley-terry":
        fit = fit_bradley_terry(pairwise_wins(M), prior_weight=prior_weight)
        p = bt_prob(fit, a, b)
        return _sign(p - 0.5), {"p": p, "theta": [fit[a], fit[b]]}
    if method == "absolute":
        if cdfs is None:
            raise DomainError("the absolute method needs per-problem absolute-rank functions")
        V = absolute_normalize(M, cdfs).values.mean(axis=1)
        return _sign(V[ib] - V[ia]), {"mean_absolute_rank": [float(V[ia]), float(V[ib])]}
    raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")


def _subsets(
    algorithms: Sequence[str],
    pair: Sequence[str],
    explicit: Iterable[Iterable[str]] | None,
    leave_k_out: int | None,
    size_limit: int,
) -> Iterable[tuple[str, ...]]:
    full = set(algorithms)
    others = [x for x in algorithms if x not in pair]
    if explicit is not None:
        for s in explicit:
            s = set(s)
            if not set(pair) <= s:
                log.info("skipping subset %s: it does not contain %s and %s", sorted(s), *pair)
                continue
            if not s < full:
                log.info("skipping subset %s: not a strict subset", sorted(s))
                continue
            unknown = s - full
            if unknown:
                log.info("skipping subset with unknown labels %s", sorted(unknown))
                continue
            yield tuple(x for x in algorithms if x in s)
        return
    if leave_k_out is not None:
        if not 1 <= leave_k_out <= len(others):
            raise DomainError(f"leave-k-out needs 1 <= k <= {len(others)}")
        for dropped in itertools.combinations(others, leave_k_out):
            d = set(dropped)
            yield tuple(x for x in algorithms if x not in d)
        return
    if len(algorithms) > size_limit:
        raise CapabilityError(
            f"exhaustive subset enumeration over {len(algorithms)} algorithms exceeds "
            f"the limit of {size_limit}; use leave-k-out or explicit subsets"
        )
    for k in range(0, len(others)):
        for kept in itertools.combinations(others, k):
            s = set(kept) | set(pair)
            yield tuple(x for x in algorithms if x in s)


def niia_check(
    M: PerformanceMatrix,
    pair: Sequence[str],
    method: str = "avg-rank",
    *,
    subsets: Iterable[Iterable[str]] | None = None,
    leave_k_out: int | None = None,
    size_limit: int = 20,
    cdfs: Mapping[str, AbsRankFn] | None = None,
    gated: bool = False,
    alpha: float = 0.001,
    convention: str = DEFAULT_CONVENTION,
    prior_weight: float = 0.0,
) -> list[FlipReport]:
    """Compare the verdict on ``pair`` for ``M`` against each subset.

    Subsets come from ``subsets`` when given, else from leave-``k``-out when
    ``leave_k_out`` is set, else from exhaustive enumeration of every strict
    subset containing the pair (refused above ``size_limit`` algorithms).
    One report is returned per evaluated subset; filter on ``flipped``.
    """
    a, b = pair
    M.index(a)
    M.index(b)
    if a == b:
        raise DomainError("pair must name two different algorithms")
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
    direction: Callable = lambda X: pair_direction(  # noqa: E731
        X,
        (a, b),
        method,
        cdfs=cdfs,
        gated=gated,
        alpha=alpha,
        convention=convention,
        prior_weight=prior_weight,
    )
    full_dir, full_ev = direction(M)
    reports = []
    for subset in _subsets(M.algorithms, (a, b), subsets, leave_k_out, size_limit):
        sub_dir, sub_ev = direction(project(M, subset))
        reports.append(
            FlipReport(method, (a, b), subset, full_dir, sub_dir, {"full": full_ev, "subset": sub_ev})
        )
    return reports
