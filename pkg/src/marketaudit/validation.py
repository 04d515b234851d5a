"""Small input-validation helpers used by the estimators and metrics."""
from __future__ import annotations

from typing import Any

import numpy as np

from .errors import EmptyInput, InvalidParam, LengthMismatch


def as_float_array(x: Any, name: str = "input") -> np.ndarray:
    """Coerce to a 1-D float64 array without copying when possible."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InvalidParam(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def require_nonempty(arr: np.ndarray, name: str = "input") -> np.ndarray:
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    return arr


def require_same_length(a: np.ndarray, b: np.ndarray, what: str = "sequences") -> None:
    if len(a) != len(b):
        raise LengthMismatch(f"{what} differ in length: {len(a)} vs {len(b)}")


def require_finite(arr: np.ndarray, name: str = "input") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise InvalidParam(f"{name} contains non-finite values")
    return arr


def closes_of(x: Any) -> np.ndarray:
    """Accept either a PriceSeries or a bare sequence of prices."""
    closes = getattr(x, "closes", None)
    if closes is not None:
        return np.asarray(closes, dtype=float)
    return as_float_array(x, "prices")
