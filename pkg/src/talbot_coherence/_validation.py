"""Input checking shared by the public functions and estimators."""

from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


def check_positive(value, name: str) -> float:
    """Return ``value`` as float, raising DomainError unless finite or +inf and > 0."""
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {value!r}") from exc
    if math.isnan(value) or value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return value


def check_nonnegative(value, name: str) -> float:
    value = float(value)
    if math.isnan(value) or value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return value


def check_1d(values, name: str, *, dtype=float, min_length: int = 1) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise DomainError(f"{name} needs at least {min_length} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_strictly_increasing(arr: np.ndarray, name: str) -> None:
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise DomainError(f"{name} must be strictly increasing")
