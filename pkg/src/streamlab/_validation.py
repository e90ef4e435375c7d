"""Small input-validation helpers shared by the public API."""

from __future__ import annotations

import math

import numpy as np


class ValidationError(ValueError):
    """Raised when a parameter or input record violates its contract."""


def check_finite(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(value, name):
    value = check_finite(value, name)
    if value <= 0:
        raise ValidationError(f"{name} must be > 0, got {value!r}")
    return value


def check_non_negative(value, name):
    value = check_finite(value, name)
    if value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}")
    return value


def check_fraction(value, name):
    """Open unit interval, as required for a watched fraction."""
    value = check_finite(value, name)
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def check_records(records):
    """Coerce flow records to ``(timestamps, nbytes)`` arrays.

    Accepts an ``(n, 2)`` array-like of ``(timestamp_s, bytes)`` rows or a
    ``(timestamps, nbytes)`` pair of equal-length sequences.
    """
    if isinstance(records, tuple) and len(records) == 2 and np.ndim(records[0]) == 1:
        ts = np.asarray(records[0], dtype=float)
        nb = np.asarray(records[1])
    else:
        arr = np.asarray(records, dtype=float)
        if arr.size == 0:
            return np.empty(0), np.empty(0, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError(
                f"flow records must have shape (n, 2), got {arr.shape}")
        ts, nb = arr[:, 0], arr[:, 1]
    if ts.shape != nb.shape:
        raise ValidationError("timestamps and bytes must have the same length")
    if ts.size == 0:
        return np.empty(0), np.empty(0, dtype=np.int64)
    if not np.all(np.isfinite(ts)):
        raise ValidationError("timestamps must be finite")
    if np.any(np.diff(ts) < 0):
        raise ValidationError("timestamps must be non-decreasing")
    nb = np.asarray(nb, dtype=float)
    if np.any(nb < 0) or not np.all(np.isfinite(nb)):
        raise ValidationError("byte counts must be finite and >= 0")
    if np.any(nb != np.round(nb)):
        raise ValidationError("byte counts must be whole numbers")
    return ts, nb.astype(np.int64)
