import numpy as np
import pytest
from scipy.stats import qmc

from absrank.errors import CapabilityError, DomainError
from absrank.sobol import TABLE_ID, SobolConfig, max_dimension, sobol_points


@pytest.mark.parametrize("dim", [1, 2, 5, 50, 1024])
def test_identical_to_scipy_unscrambled(dim):
    ours = sobol_points(SobolConfig(dim, 10, skip=0))
    ref = qmc.Sobol(dim, scramble=False, bits=32).random_base2(10)
    np.testing.assert_array_equal(ours, ref)


def test_skip_drops_leading_points():
    full = sobol_points(SobolConfig(3, 8, skip=0))
    ref = qmc.Sobol(3, scramble=False, bits=32)
    ref.fast_forward(1)
    np.testing.assert_array_equal(sobol_points(SobolConfig(3, 8)), ref.random(256))
    np.testing.assert_array_equal(sobol_points(SobolConfig(3, 8))[:-1], full[1:])


def test_stratification_of_every_coordinate():
    # each block of 2^k points from the start is a permutation of j / 2^k per coordinate
    P = sobol_points(SobolConfig(20, 9, skip=0))
    for k in range(1, 10):
        block = P[: 1 << k]
        for j in range(20):
            np.testing.assert_array_equal(np.sort(block[:, j]), np.arange(1 << k) / (1 << k))


def test_determinism_bytes():
    cfg = SobolConfig(7, 12, seed=99)
    assert sobol_points(cfg).tobytes() == sobol_points(cfg).tobytes()


def test_seeded_shift_differs_and_stays_in_unit_cube():
    a = sobol_points(SobolConfig(4, 10))
    b = sobol_points(SobolConfig(4, 10, seed=3))
    assert not np.array_equal(a, b)
    assert b.min() >= 0.0 and b.max() < 1.0


def test_one_dimensional_points_are_hand_computable():
    np.testing.assert_array_equal(
        sobol_points(SobolConfig(1, 3, skip=0))[:, 0], [0, 0.5, 0.75, 0.25, 0.375, 0.875, 0.625, 0.125]
    )


def test_config_round_trip_and_limits():
    cfg = SobolConfig(3, 5, skip=2, seed=7)
    assert SobolConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.to_dict()["direction_numbers"] == TABLE_ID
    assert max_dimension() >= 1024
    with pytest.raises(CapabilityError):
        SobolConfig(max_dimension() + 1, 4)
    with pytest.raises(DomainError):
        SobolConfig(0, 4)
