"""Generalized regression neural network (Gaussian Nadaraya-Watson smoother)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDatasetError, InvalidHyperparameterError
from .kernels import squared_distances


@dataclass(frozen=True, eq=False)
class GrnnModel:
    train_features: np.ndarray
    train_labels: np.ndarray
    sigma: float

    method = "grnn"

    @property
    def hyperparameters(self):
        return {"sigma": self.sigma}

    def predict(self, X):
        """Kernel-weighted label average at each row of ``X``.

        Rows whose Gaussian weights all underflow to zero take the label of the
        nearest training point, which is the small-sigma limit of the estimate.
        """
        sq = squared_distances(X, self.train_features)
        weights = np.exp(-sq / (2.0 * self.sigma ** 2))
        den = weights.sum(axis=1)
        num = weights @ self.train_labels
        out = np.empty(len(sq))
        ok = den > 0
        out[ok] = num[ok] / den[ok]
        if not np.all(ok):
            out[~ok] = self.train_labels[np.argmin(sq[~ok], axis=1)]
        # rounding can push a convex combination one ulp past the label range
        return np.clip(out, self.train_labels.min(), self.train_labels.max())


def grnn_fit(train, sigma):
    if not sigma > 0:
        raise InvalidHyperparameterError(f"GRNN sigma must be positive, got {sigma}")
    if len(train) == 0:
        raise EmptyDatasetError("GRNN needs at least one training row")
    features = np.array(train.features, dtype=np.float64)
    labels = np.array(train.labels, dtype=np.float64)
    features.setflags(write=False)
    labels.setflags(write=False)
    return GrnnModel(features, labels, float(sigma))


def grnn_predict(model: GrnnModel, x):
    return float(model.predict(np.reshape(x, (1, -1)))[0])
