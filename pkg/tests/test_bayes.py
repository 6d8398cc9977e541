import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from absrank.bayes import WinMatrix, bayes_compare, bt_prob, fit_bradley_terry, pairwise_wins
from absrank.core import PerformanceMatrix
from absrank.errors import DomainError


def _likelihood_oracle(w):
    # direct maximum likelihood over log-strengths, first player pinned to 0
    n = w.shape[0]

    def nll(z):
        s = np.concatenate(([0.0], z))
        diff = s[:, None] - s[None, :]
        return float((w * np.logaddexp(0.0, -diff)).sum())

    res = minimize(nll, np.zeros(n - 1), method="BFGS", options={"gtol": 1e-10})
    s = np.concatenate(([0.0], res.x))
    return np.exp(s - s.mean())


def _wins(w):
    w = np.asarray(w, dtype=np.int64)
    return WinMatrix(tuple(f"a{i}" for i in range(w.shape[0])), w, np.zeros_like(w))


@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_matches_direct_likelihood_maximization(n, rnd):
    w = np.array([[0 if i == j else rnd.randint(1, 30) for j in range(n)] for i in range(n)])
    fit = fit_bradley_terry(_wins(w), tolerance=1e-13)
    assert fit.converged
    oracle = _likelihood_oracle(w.astype(float))
    P = fit.theta[:, None] / (fit.theta[:, None] + fit.theta[None, :])
    Q = oracle[:, None] / (oracle[:, None] + oracle[None, :])
    np.testing.assert_allclose(P, Q, atol=1e-6)


def test_two_players_closed_form():
    fit = fit_bradley_terry(_wins([[0, 30], [10, 0]]))
    assert bt_prob(fit, "a0", "a1") == pytest.approx(0.75, abs=1e-12)
    assert fit["a0"] * fit["a1"] == pytest.approx(1.0)


def test_normalizations_agree_on_probabilities():
    w = [[0, 5, 7], [3, 0, 9], [2, 4, 0]]
    g = fit_bradley_terry(_wins(w), normalization="geometric")
    s = fit_bradley_terry(_wins(w), normalization="sum")
    assert s.theta.sum() == pytest.approx(1.0)
    assert np.exp(np.log(g.theta).mean()) == pytest.approx(1.0)
    for a in g.labels:
        for b in g.labels:
            assert bt_prob(g, a, b) == pytest.approx(bt_prob(s, a, b), abs=1e-9)


def test_winless_player_goes_to_zero():
    fit = fit_bradley_terry(_wins([[0, 3, 5], [2, 0, 5], [0, 0, 0]]))
    assert fit.converged
    assert fit["a2"] == 0.0
    assert bt_prob(fit, "a0", "a1") == pytest.approx(0.6, abs=1e-10)


def test_unbeaten_player_is_flagged():
    fit = fit_bradley_terry(_wins([[0, 3], [0, 0]]), max_iter=50)
    assert not fit.converged
    assert fit.unbounded == ("a0",)


def test_prior_weight_keeps_strengths_finite():
    fit = fit_bradley_terry(_wins([[0, 3], [0, 0]]), prior_weight=1.0)
    assert fit.converged and np.all(fit.theta > 0)
    assert bt_prob(fit, "a0", "a1") == pytest.approx(0.8, abs=1e-10)


def test_bad_arguments():
    with pytest.raises(DomainError):
        fit_bradley_terry(_wins([[0, 1], [1, 0]]), prior_weight=-1)
    with pytest.raises(DomainError):
        fit_bradley_terry(_wins([[0, 1], [1, 0]]), normalization="l2")


def test_pairwise_wins_and_ties():
    M = PerformanceMatrix(("x", "y"), ("p", "q", "r"), np.array([[1.0, 2.0, 3.0], [2.0, 2.0, 1.0]]))
    W = pairwise_wins(M)
    np.testing.assert_array_equal(W.wins, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(W.ties, [[0, 1], [1, 0]])


def test_verdict_symmetry(paradox):
    d1, _ = paradox
    _, (ab, ba) = bayes_compare(d1, [("A", "B"), ("B", "A")])
    assert ab.p_ab == pytest.approx(ba.p_ba)
    assert ab.result == ba.result == "B≻A"
