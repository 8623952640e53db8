"""Prediction error measures: RMSE, coefficient of determination, relative RMSE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndefinedDenominatorError, ValidationError


@dataclass(frozen=True, eq=False)
class PredictionPairs:
    actual: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        actual = np.asarray(self.actual, dtype=np.float64).reshape(-1)
        predicted = np.asarray(self.predicted, dtype=np.float64).reshape(-1)
        if actual.shape != predicted.shape:
            raise ValidationError(f"length mismatch: {actual.size} actual vs {predicted.size} predicted")
        if actual.size == 0:
            raise ValidationError("at least one prediction pair is required")
        if not (np.all(np.isfinite(actual)) and np.all(np.isfinite(predicted))):
            raise ValidationError("prediction pairs must be finite")
        object.__setattr__(self, "actual", actual)
        object.__setattr__(self, "predicted", predicted)


def _pairs(p, predicted=None):
    if predicted is not None:
        return PredictionPairs(p, predicted)
    if isinstance(p, PredictionPairs):
        return p
    return PredictionPairs(*p)


def rmse(p, predicted=None):
    """Root mean square error; accepts a PredictionPairs or ``(actual, predicted)``."""
    p = _pairs(p, predicted)
    err = p.predicted - p.actual
    return float(np.sqrt(np.dot(err, err) / err.size))


def r_squared(p, predicted=None):
    p = _pairs(p, predicted)
    if p.actual.size < 2:
        raise UndefinedDenominatorError("R^2 needs at least two observations")
    centred = p.actual - p.actual.mean()
    denom = float(np.dot(centred, centred))
    if denom == 0.0:
        raise UndefinedDenominatorError("R^2 is undefined for constant actual values")
    err = p.predicted - p.actual
    return 1.0 - float(np.dot(err, err)) / denom


def rrmse(p, predicted=None):
    """RMSE divided by the mean of the actual values."""
    p = _pairs(p, predicted)
    mean = float(p.actual.mean())
    if mean == 0.0:
        raise UndefinedDenominatorError("relative RMSE is undefined when the actual mean is zero")
    return rmse(p) / mean


def improvement_pct(baseline_rmse, new_rmse):
    if not baseline_rmse > 0:
        raise DomainError(f"baseline RMSE must be positive, got {baseline_rmse}")
    return 100.0 * (baseline_rmse - new_rmse) / baseline_rmse


def try_metric(fn, actual, predicted):
    """``fn(actual, predicted)`` or None when undefined (too few / degenerate rows)."""
    try:
        return fn(actual, predicted)
    except (UndefinedDenominatorError, ValidationError):
        return None
