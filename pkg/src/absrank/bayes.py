"""Pairwise win extraction and Bradley-Terry fitting.

The fit iterates Newman's form of Zermelo's fixed point,

    theta_i <- sum_j w_ij theta_j / (theta_i + theta_j)
               / sum_j w_ji / (theta_i + theta_j),

updating players in place (Gauss-Seidel order). A simultaneous update can
oscillate forever on two-player components; the in-place sweep does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import PerformanceMatrix
from .errors import DomainError, NotFoundError

__all__ = [
    "WinMatrix",
    "BradleyTerryFit",
    "BayesVerdict",
    "pairwise_wins",
    "fit_bradley_terry",
    "bt_prob",
    "bayes_compare",
]

NORMALIZATIONS = ("geometric", "sum")


@dataclass(frozen=True, eq=False)
class WinMatrix:
    """``wins[i, j]``: problems on which ``i`` is strictly better than ``j``."""

    labels: tuple[str, ...]
    wins: np.ndarray
    ties: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise NotFoundError(f"unknown algorithm {label!r}") from None


def pairwise_wins(M: PerformanceMatrix) -> WinMatrix:
    X = M.loss
    wins = (X[:, None, :] < X[None, :, :]).sum(axis=2).astype(np.int64)
    ties = (X[:, None, :] == X[None, :, :]).sum(axis=2).astype(np.int64)
    np.fill_diagonal(ties, 0)
    wins.setflags(write=False)
    ties.setflags(write=False)
    return WinMatrix(M.algorithms, wins, ties)


@dataclass(frozen=True, eq=False)
class BradleyTerryFit:
    labels: tuple[str, ...]
    theta: np.ndarray
    iterations: int
    converged: bool
    tolerance: float
    prior_weight: float
    normalization: str = "geometric"
    unbounded: tuple[str, ...] = ()

    def __getitem__(self, label: str) -> float:
        try:
            return float(self.theta[self.labels.index(label)])
        except ValueError:
            raise NotFoundError(f"unknown algorithm {label!r}") from None

    def to_dict(self) -> dict:
        return {
            "theta": dict(zip(self.labels, self.theta.tolist())),
            "iterations": self.iterations,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "prior_weight": self.prior_weight,
            "normalization": self.normalization,
            "unbounded": list(self.unbounded),
        }


def _normalize(theta: np.ndarray, how: str) -> np.ndarray:
    pos = theta > 0
    if not pos.any():
        return theta
    if how == "geometric":
        return theta / math.exp(np.log(theta[pos]).mean())
    return theta / theta.sum()


def fit_bradley_terry(
    W: WinMatrix,
    tolerance: float = 1e-10,
    max_iter: int = 10_000,
    prior_weight: float = 0.0,
    normalization: str = "geometric",
) -> BradleyTerryFit:
    """Maximum-likelihood Bradley-Terry strengths from a win matrix.

    ``prior_weight`` adds that many pseudo-wins in both directions for every
    pair, which keeps all strengths positive and finite. With the default of
    0 a player without wins gets strength exactly 0, and a player without
    losses has no finite estimate: it is listed in ``unbounded``, left at its
    current value, and the fit is reported as not converged.

    ``normalization="geometric"`` scales the positive strengths to geometric
    mean 1; ``"sum"`` scales all strengths to sum 1. Probabilities do not
    depend on the choice.
    """
    if W.n < 2:
        raise DomainError("need at least 2 players")
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    if prior_weight < 0:
        raise DomainError("prior_weight must be non-negative")
    if normalization not in NORMALIZATIONS:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}")
    n = W.n
    w = W.wins.astype(float)
    if prior_weight:
        w = w + prior_weight * (1.0 - np.eye(n))
    wt = np.ascontiguousarray(w.T)
    unbounded = [i for i in range(n) if w[:, i].sum() == 0 and w[i].sum() > 0]
    theta = np.ones(n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        old = theta.copy()
        for i in range(n):
            if i in unbounded:
                continue
            s = theta[i] + theta
            s[i] = 1.0
            with np.errstate(divide="ignore", invalid="ignore"):
                num = np.where(w[i] > 0, w[i] * theta / s, 0.0).sum()
                den = np.where(wt[i] > 0, wt[i] / s, 0.0).sum()
            theta[i] = num / den if den > 0 else 0.0
        theta = _normalize(theta, normalization)
        pos = theta > 0
        change = np.zeros(n)
        change[pos] = np.abs(theta[pos] - old[pos]) / theta[pos]
        change[~pos & (old > 0)] = np.inf
        if change.max() < tolerance:
            converged = not unbounded
            break
    return BradleyTerryFit(
        W.labels,
        theta,
        it,
        converged,
        tolerance,
        prior_weight,
        normalization,
        tuple(W.labels[i] for i in unbounded),
    )


def bt_prob(fit: BradleyTerryFit, i: str, j: str) -> float:
    """``P(i beats j) = theta_i / (theta_i + theta_j)``; 0.5 when both are zero."""
    ti, tj = fit[i], fit[j]
    if ti + tj == 0:
        return 0.5
    return ti / (ti + tj)


@dataclass(frozen=True)
class BayesVerdict:
    a: str
    b: str
    theta_a: float
    theta_b: float
    p_ab: float

    @property
    def p_ba(self) -> float:
        return 1.0 - self.p_ab

    @property
    def direction(self) -> str:
        if self.p_ab > 0.5:
            return ">"
        if self.p_ab < 0.5:
            return "<"
        return "="

    @property
    def result(self) -> str:
        return {">": f"{self.a}≻{self.b}", "<": f"{self.b}≻{self.a}"}.get(self.direction, "indeterminate")

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "theta_a": self.theta_a,
            "theta_b": self.theta_b,
            "p_a_beats_b": self.p_ab,
            "p_b_beats_a": self.p_ba,
            "result": self.result,
        }


def bayes_compare(
    M: PerformanceMatrix,
    pairs: Iterable[Sequence[str]],
    prior_weight: float = 0.0,
    tolerance: float = 1e-10,
    max_iter: int = 10_000,
    normalization: str = "geometric",
) -> tuple[BradleyTerryFit, list[BayesVerdict]]:
    pairs = [tuple(pair) for pair in pairs]
    for a, b in pairs:
        M.index(a)
        M.index(b)
    fit = fit_bradley_terry(pairwise_wins(M), tolerance, max_iter, prior_weight, normalization)
    return fit, [BayesVerdict(a, b, fit[a], fit[b], bt_prob(fit, a, b)) for a, b in pairs]
