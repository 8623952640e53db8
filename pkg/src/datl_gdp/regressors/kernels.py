from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidHyperparameterError

KERNEL_KINDS = ("rbf", "linear")


@dataclass(frozen=True)
class KernelSpec:
    """``rbf``: exp(-gamma * |a - b|^2); ``linear``: a . b (gamma unused)."""

    kind: str = "rbf"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidHyperparameterError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise InvalidHyperparameterError(f"kernel gamma must be positive, got {self.gamma}")


def squared_distances(a, b):
    # Broadcast difference rather than the |a|^2 + |b|^2 - 2ab expansion: exact zeros
    # on the diagonal and exact symmetry.
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kernel_matrix(a, b, kernel: KernelSpec):
    if kernel.kind == "linear":
        return np.atleast_2d(a) @ np.atleast_2d(b).T
    return np.exp(-kernel.gamma * squared_distances(a, b))
