import numpy as np
import pytest

from pcausality.validation import (
    StochasticityError, check_distribution, check_positive_int, check_probability,
    check_stochastic, random_stochastic,
)


def test_check_stochastic_names_offending_column():
    mat = np.array([[1.0, 0.3, 0.5], [0.0, 0.6, 0.5]])
    with pytest.raises(StochasticityError) as info:
        check_stochastic(mat)
    assert info.value.column == 1
    assert "column 1" in str(info.value)


def test_check_stochastic_rejects_negative_entries():
    with pytest.raises(StochasticityError) as info:
        check_stochastic([[1.5, 1.0], [-0.5, 0.0]])
    assert info.value.column == 0


def test_check_stochastic_rejects_nan_and_bad_shape():
    with pytest.raises(StochasticityError):
        check_stochastic([[np.nan], [1.0]])
    with pytest.raises(ValueError):
        check_stochastic(np.eye(2), shape=(3, 2))
    with pytest.raises(ValueError):
        check_stochastic(np.ones(3))


def test_check_stochastic_tolerance():
    check_stochastic([[0.5 + 1e-10], [0.5]])
    with pytest.raises(StochasticityError):
        check_stochastic([[0.5 + 1e-6], [0.5]])


def test_scalar_checks():
    assert check_probability(0.25) == 0.25
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ValueError):
            check_probability(bad)
    assert check_positive_int(3, "n") == 3
    with pytest.raises(ValueError):
        check_positive_int(0, "n")
    with pytest.raises(ValueError):
        check_positive_int(2.5, "n")
    with pytest.raises(ValueError):
        check_positive_int(True, "n")
    with pytest.raises(StochasticityError):
        check_distribution([0.5, 0.6])
    with pytest.raises(ValueError):
        check_distribution([0.5, 0.5], size=3)


def test_random_stochastic(rng):
    m = random_stochastic(5, 7, rng)
    assert m.shape == (5, 7)
    assert np.allclose(m.sum(axis=0), 1.0)
    assert m.min() >= 0
