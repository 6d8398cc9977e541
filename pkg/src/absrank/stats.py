"""Friedman test, Bonferroni-Dunn critical difference and pairwise verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy.stats import norm

from .core import PerformanceMatrix
from .errors import DomainError
from .normalize import RankMatrix, rank_normalize
from .special import chi2_logsf

__all__ = [
    "FriedmanResult",
    "PairVerdict",
    "NphtReport",
    "CONVENTIONS",
    "DEFAULT_CONVENTION",
    "friedman_test",
    "bonferroni_dunn_cd",
    "npht_compare",
]

# Smallest p rendered as a number; anything below prints as 0.0.
P_FLOOR_LOG10 = -308.0

# name -> (number of comparisons as a function of n, tails)
CONVENTIONS: dict[str, tuple] = {
    "all-pairs-two-sided": (lambda n: n * (n - 1) / 2, 2),
    "all-pairs-one-sided": (lambda n: n * (n - 1) / 2, 1),
    "control-two-sided": (lambda n: n - 1, 2),
    "control-one-sided": (lambda n: n - 1, 1),
}
DEFAULT_CONVENTION = "all-pairs-two-sided"


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    df: int
    log10_p: float

    @property
    def p(self) -> float:
        if self.log10_p < P_FLOOR_LOG10:
            return 0.0
        return 10.0**self.log10_p


def friedman_test(R: RankMatrix) -> FriedmanResult:
    """Classic Friedman chi-square on a rank matrix, p-value kept in log space.

    The statistic is evaluated as ``12 / (p n (n+1)) * sum(S_i^2) - 3 p (n+1)``
    from the rank sums ``S_i``; with integer or half-integer ranks every term
    is exactly representable, so textbook cases come out exact.
    """
    n, p = R.n, R.p
    S = R.rank_sums()
    stat = 12.0 * float((S * S).sum()) / (p * n * (n + 1)) - 3.0 * p * (n + 1)
    stat = max(stat, 0.0)
    df = n - 1
    log10_p = chi2_logsf(stat, df) / math.log(10.0)
    return FriedmanResult(stat, df, log10_p)


def bonferroni_dunn_cd(n: int, p: int, alpha: float, convention: str = DEFAULT_CONVENTION) -> float:
    """Critical difference ``q * sqrt(n (n+1) / (6 p))`` for average ranks.

    ``q`` is the upper standard-normal quantile at ``alpha`` divided by the
    number of comparisons and tails named by ``convention``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if n < 2 or p < 1:
        raise DomainError("need n >= 2 algorithms and p >= 1 problems")
    try:
        comparisons, tails = CONVENTIONS[convention]
    except KeyError:
        raise DomainError(f"unknown multiplicity convention {convention!r}") from None
    q = norm.isf(alpha / (comparisons(n) * tails))
    return float(q * math.sqrt(n * (n + 1) / (6.0 * p)))


@dataclass(frozen=True)
class PairVerdict:
    """Outcome for an ordered pair ``(a, b)``.

    ``direction`` is ``">"`` when ``a`` is significantly better, ``"<"`` when
    ``b`` is, and ``"="`` when the difference is not significant.
    """

    a: str
    b: str
    avg_rank_a: float
    avg_rank_b: float
    delta: float
    direction: str

    @property
    def result(self) -> str:
        if self.direction == ">":
            return f"{self.a}≻{self.b}"
        if self.direction == "<":
            return f"{self.b}≻{self.a}"
        return "indistinguishable"

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "average_rank_a": self.avg_rank_a,
            "average_rank_b": self.avg_rank_b,
            "delta": self.delta,
            "direction": self.direction,
            "result": self.result,
        }


@dataclass(frozen=True)
class NphtReport:
    avg_ranks: dict[str, float]
    friedman: FriedmanResult
    cd: float
    alpha: float
    convention: str
    pairwise: list[PairVerdict] = field(default_factory=list)

    @property
    def significant(self) -> bool:
        """Whether the Friedman test rejects equal performance at ``alpha``."""
        return self.friedman.log10_p < math.log10(self.alpha)

    def to_dict(self) -> dict:
        return {
            "friedman_chi2": self.friedman.statistic,
            "friedman_df": self.friedman.df,
            "friedman_p": self.friedman.p,
            "friedman_log10_p": self.friedman.log10_p,
            "critical_difference": self.cd,
            "alpha": self.alpha,
            "convention": self.convention,
            "significant": self.significant,
            "average_ranks": dict(self.avg_ranks),
            "pairs": [v.to_dict() for v in self.pairwise],
        }


def npht_compare(
    M: PerformanceMatrix,
    pairs: Iterable[Sequence[str]],
    alpha: float = 0.001,
    convention: str = DEFAULT_CONVENTION,
) -> NphtReport:
    """Rank, run Friedman, then judge each pair against the critical difference.

    When the Friedman test does not reject at ``alpha`` every pair is reported
    as indistinguishable, regardless of the rank gap.
    """
    pairs = [tuple(pair) for pair in pairs]
    for a, b in pairs:
        M.index(a)
        M.index(b)
    R = rank_normalize(M)
    avg = R.average_ranks()
    fr = friedman_test(R)
    cd = bonferroni_dunn_cd(M.n, M.p, alpha, convention)
    gate = fr.log10_p < math.log10(alpha)
    verdicts = []
    for a, b in pairs:
        ra, rb = avg[a], avg[b]
        delta = abs(ra - rb)
        if gate and delta > cd:
            direction = ">" if ra < rb else "<"
        else:
            direction = "="
        verdicts.append(PairVerdict(a, b, ra, rb, delta, direction))
    return NphtReport(avg, fr, cd, alpha, convention, verdicts)
