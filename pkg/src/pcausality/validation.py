"""Input validation helpers shared by every module.

These mirror the ``check_array`` family in scikit-learn: they take raw user
input, coerce it to a float array and either return it or raise with a
message naming the offending entry.
"""
import numpy as np

STOCH_TOL = 1e-9
EXACT_TOL = 1e-12


class StochasticityError(ValueError):
    """A matrix or vector failed left-stochasticity validation."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


def check_probability(p, name="p"):
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_distribution(vec, size=None, tol=STOCH_TOL, name="state"):
    """Validate a probability vector and return it as a float array."""
    arr = np.asarray(vec, dtype=float).reshape(-1)
    if size is not None and arr.shape[0] != size:
        raise ValueError(f"{name} has {arr.shape[0]} entries, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise StochasticityError(f"{name} has non-finite entries")
    if arr.size and (arr.min() < -tol or arr.max() > 1 + tol):
        raise StochasticityError(f"{name} has entries outside [0, 1]")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise StochasticityError(f"{name} sums to {float(total)!r}, not 1 (tol {tol:g})")
    return arr


def check_stochastic(matrix, shape=None, tol=STOCH_TOL, name="matrix"):
    """Validate a left-stochastic matrix (columns are distributions).

    Raises ``StochasticityError`` naming the first offending column.
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        col = int(np.argwhere(~np.isfinite(arr))[0][1])
        raise StochasticityError(f"{name} column {col} has non-finite entries", col)
    bad = np.flatnonzero((arr < -tol).any(axis=0) | (arr > 1 + tol).any(axis=0))
    if bad.size:
        col = int(bad[0])
        raise StochasticityError(
            f"{name} column {col} has entries outside [0, 1]", col)
    sums = arr.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        col = int(bad[0])
        raise StochasticityError(
            f"{name} column {col} sums to {float(sums[col])!r}, not 1 (tol {tol:g})", col)
    return arr


def random_stochastic(rows, cols, rng, concentration=1.0):
    """Columns drawn from a symmetric Dirichlet distribution."""
    if rows == 0:
        return np.zeros((0, cols))
    return rng.dirichlet(np.full(rows, concentration), size=cols).T
