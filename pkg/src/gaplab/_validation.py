"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np

from .errors import ConfigurationError, DomainError


def check_positive(value, name, *, allow_zero=False):
    """Return ``value`` as float, raising :class:`DomainError` unless it is positive and finite."""
    if isinstance(value, bool) or not isinstance(value, Real):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or (value == 0.0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def check_open_interval(value, name, low, high):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not (low < value < high):
        raise DomainError(f"{name} must lie in ({low}, {high}), got {value!r}")
    return value


def check_count(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_dimension(n, minimum=2):
    """Dimensions are documented as integers >= 2; non-integral reals are accepted by the PDE."""
    if isinstance(n, bool) or not isinstance(n, Real):
        raise DomainError(f"dimension must be a real number, got {n!r}")
    if not math.isfinite(n) or n < minimum:
        raise DomainError(f"dimension must be >= {minimum}, got {n!r}")
    return int(n) if float(n).is_integer() else float(n)


def check_eps_array(eps, *, min_points=1, strictly_decreasing=False):
    """Validate a 1-d array of gap half-widths."""
    arr = np.atleast_1d(np.asarray(eps, dtype=float))
    if arr.ndim != 1:
        raise ConfigurationError("eps must be one-dimensional")
    if arr.size < min_points:
        raise ConfigurationError(f"need at least {min_points} eps values, got {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("all eps values must be positive and finite")
    if strictly_decreasing and np.any(np.diff(arr) >= 0.0):
        raise ConfigurationError("eps values must be strictly decreasing")
    return arr
