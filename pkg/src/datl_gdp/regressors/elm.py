"""Kernel extreme learning machine, plus the random-hidden-node reference variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..errors import EmptyDatasetError, InvalidHyperparameterError, NumericFailureError
from .kernels import KernelSpec, kernel_matrix


@dataclass(frozen=True, eq=False)
class ElmModel:
    train_features: np.ndarray
    kernel: KernelSpec
    out_weights: np.ndarray
    regularization: float

    method = "elm"

    @property
    def hyperparameters(self):
        return {"C": self.regularization, "gamma": self.kernel.gamma}

    def predict(self, X):
        return kernel_matrix(X, self.train_features, self.kernel) @ self.out_weights


def elm_fit(train, kernel: KernelSpec, C):
    """Solve (K + I/C) w = y by Cholesky; each training point is one hidden node."""
    if not C > 0:
        raise InvalidHyperparameterError(f"ELM regularization C must be positive, got {C}")
    if len(train) == 0:
        raise EmptyDatasetError("ELM needs at least one training row")
    X = np.array(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.float64)
    A = kernel_matrix(X, X, kernel) + np.eye(len(X)) / C
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=True)
        w = linalg.cho_solve(factor, y)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericFailureError(f"ELM kernel system is not positive definite (C={C}): {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericFailureError(f"ELM solve produced non-finite weights (C={C})")
    X.setflags(write=False)
    w.setflags(write=False)
    return ElmModel(X, kernel, w, float(C))


def elm_predict(model: ElmModel, x):
    return float(model.predict(np.reshape(x, (1, -1)))[0])


@dataclass(frozen=True, eq=False)
class RandomElmModel:
    input_weights: np.ndarray
    biases: np.ndarray
    out_weights: np.ndarray
    seed: int

    method = "elm-random"

    @property
    def hyperparameters(self):
        return {"hidden_nodes": len(self.biases), "seed": self.seed}

    def hidden(self, X):
        return 1.0 / (1.0 + np.exp(-(np.atleast_2d(X) @ self.input_weights.T + self.biases)))

    def predict(self, X):
        return self.hidden(X) @ self.out_weights


def random_elm_fit(train, seed, hidden_nodes=None):
    """Sigmoid hidden layer with random weights; output weights by pseudo-inverse."""
    n = len(train)
    if n == 0:
        raise EmptyDatasetError("ELM needs at least one training row")
    m = hidden_nodes if hidden_nodes is not None else min(2 * n, 200)
    if m < 1:
        raise InvalidHyperparameterError("hidden node count must be positive")
    rng = np.random.default_rng(seed)
    d = train.features.shape[1]
    model = RandomElmModel(rng.uniform(-1.0, 1.0, (m, d)), rng.uniform(-1.0, 1.0, m),
                           np.zeros(m), int(seed))
    H = model.hidden(train.features)
    w = np.linalg.pinv(H) @ train.labels
    return RandomElmModel(model.input_weights, model.biases, w, int(seed))
