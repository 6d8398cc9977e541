import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from absrank.bench import BenchmarkProblem
from absrank.cdf import cdf_cone
from absrank.errors import DomainError
from absrank.sampling import (
    geometric_mean_difference,
    hypercube,
    load_samples,
    sample_function,
    save_samples,
    select_delta,
)
from absrank.sobol import SobolConfig, sobol_points


def test_one_dimensional_sphere_values_are_squared_abscissae():
    P = BenchmarkProblem("sphere", 1, -1, 1)
    cfg = SobolConfig(1, 4)
    s = sample_function(P, (-1, 1), cfg)
    x = -1 + 2 * sobol_points(cfg)[:, 0]
    np.testing.assert_array_equal(s.values, np.sort(x * x))
    assert s.n == 16


def test_constant_function():
    P = BenchmarkProblem("cone", 2, -1, 1, {"slope": 0.0, "y_min": 7.0})
    assert np.all(sample_function(P, (-1, 1), SobolConfig(2, 6)).values == 7.0)


def test_region_must_lie_in_domain():
    P = BenchmarkProblem("sphere", 2, -1, 1)
    with pytest.raises(DomainError):
        sample_function(P, (-2, 1), SobolConfig(2, 4))
    with pytest.raises(DomainError):
        sample_function(P, (-1, 1), SobolConfig(3, 4))


def test_order_of_evaluation_does_not_matter():
    P = BenchmarkProblem("rastrigin", 3, -2, 2)
    cfg = SobolConfig(3, 10)
    a = sample_function(P, (-2, 2), cfg)
    b = sample_function(P, (-2, 2), cfg, chunk=37)
    assert a.values.tobytes() == b.values.tobytes()


def test_samples_round_trip():
    P = BenchmarkProblem("sphere", 2, -1, 1, label="sph")
    s = sample_function(P, (-0.5, 0.5), SobolConfig(2, 5, seed=4))
    buf = io.StringIO()
    save_samples(s, buf)
    buf.seek(0)
    t = load_samples(buf)
    assert t.problem == "sph" and t.cfg == s.cfg
    np.testing.assert_array_equal(t.values, s.values)
    np.testing.assert_array_equal(t.region, s.region)


def test_geometric_mean_difference():
    assert geometric_mean_difference([0.1, 0.3, 0.7]) == pytest.approx(math.sqrt(0.2 * 0.4))
    assert geometric_mean_difference([0.4, 0.4, 0.2]) == pytest.approx(0.2)
    assert geometric_mean_difference([0.5, 0.5]) == 0.0
    with pytest.raises(DomainError):
        geometric_mean_difference([])


@given(
    st.lists(st.floats(0, 1), min_size=2, max_size=12, unique=True),
    st.floats(0.01, 100),
    st.floats(-100, 100),
)
def test_geometric_mean_difference_affine(v, a, b):
    v = np.array(v)
    if np.min(np.diff(np.sort(v))) < 1e-9:
        return
    assert geometric_mean_difference(a * v + b) == pytest.approx(a * geometric_mean_difference(v), rel=1e-6)


def test_hypercube_clipping():
    P = BenchmarkProblem("sphere", 2, -1, 1)
    R, clipped = hypercube(P, [0.9, 0.0], 0.2)
    assert clipped
    np.testing.assert_allclose(R, [[0.7, -0.2], [1.0, 0.2]])
    assert not hypercube(P, [0, 0], 0.5)[1]


def test_single_candidate_is_returned():
    P = BenchmarkProblem("sphere", 2, -1, 1)
    sel = select_delta(P, [0, 0], [0.01, 0.02], [0.3], SobolConfig(2, 8))
    assert sel.best == 0.3 and len(sel.scores) == 1


def test_too_small_range_scores_zero():
    P = BenchmarkProblem("sphere", 2, -1, 1)
    sel = select_delta(P, [0, 0], [0.5, 0.7, 0.9], [1e-3, 0.8], SobolConfig(2, 10))
    assert sel.scores[0] < 1e-9
    assert sel.best == 0.8


def test_constructed_cone_picks_the_matching_range():
    # metrics placed at evenly spread quantiles of the linf cone on the 0.3 cube
    d, target = 2, 0.3
    P = BenchmarkProblem("cone", d, -1, 1, {"norm": "linf"})
    metrics = [cdf_cone(d, 0.0, target).quantile(q) for q in (0.1, 0.3, 0.5, 0.7, 0.9)]
    sel = select_delta(P, [0, 0], metrics, [0.1, 0.2, 0.3, 0.4, 0.5], SobolConfig(d, 12))
    assert sel.best == target
    assert sel.scores.count(max(sel.scores)) == 1
