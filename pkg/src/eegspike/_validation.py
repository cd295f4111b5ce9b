"""Small input-validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import InputError, RangeError
from .mimetic import FEATURE_NAMES
from .signal_io import Recording


def check_feature_matrix(X) -> np.ndarray:
    """Return ``X`` as a float ``(n, 9)`` array of finite feature vectors.

    A single vector is promoted to one row; an empty input gives a
    ``(0, 9)`` array.
    """
    if hasattr(X, "features") and not isinstance(X, np.ndarray):
        X = X.features
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, len(FEATURE_NAMES))
    if arr.ndim == 2 and arr.shape[0] == 0:
        if arr.shape[1] not in (0, len(FEATURE_NAMES)):
            raise InputError(f"expected {len(FEATURE_NAMES)} feature columns, got {arr.shape[1]}")
        return np.zeros((0, len(FEATURE_NAMES)))
    try:
        arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if arr.shape[1] != len(FEATURE_NAMES):
        raise InputError(f"expected {len(FEATURE_NAMES)} feature columns, got {arr.shape[1]}")
    return arr


def check_recording(recording) -> Recording:
    if not isinstance(recording, Recording):
        raise InputError(f"expected a Recording, got {type(recording).__name__}")
    return recording


def check_positive(value, name: str, integer: bool = False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind) or not math.isfinite(value) or value <= 0:
        raise RangeError(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}")
    return value


def check_unit_interval(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise RangeError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)
