"""Input validation helpers shared by the functional API and the estimator."""
import numpy as np

from .exceptions import DimensionError, NumericalError, RangeError

# slack allowed when a value computed in floating point should lie in a
# closed interval; anything inside is clamped to the interval
RANGE_SLACK = 1e-12


def as_vector(x, name="x"):
    """Coerce to a 1-D float64 array of finite values."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite values")
    return arr


def check_length(x, n, name="x"):
    if x.shape[0] != n:
        raise DimensionError(f"{name} has length {x.shape[0]}, expected {n}")
    return x


def check_interval(x, lo, hi, name="x", slack=RANGE_SLACK):
    """Reject values outside ``[lo, hi]`` by more than ``slack``; clamp the rest."""
    x = np.asarray(x, dtype=np.float64)
    bad = (x < lo - slack) | (x > hi + slack)
    if np.any(bad):
        idx = np.flatnonzero(bad.reshape(-1))[0]
        value = x.reshape(-1)[idx]
        raise RangeError(
            f"{name}[{idx}] = {value!r} is outside [{lo}, {hi}]"
        )
    return np.clip(x, lo, hi)


def check_unit_interval(x, name="x"):
    return check_interval(x, 0.0, 1.0, name)


def check_positive_int(value, name):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
