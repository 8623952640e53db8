"""Epsilon-insensitive support vector regression trained by pairwise (SMO) updates.

The dual is kept in the 2N-variable form used by LIBSVM: ``alpha`` (sign +1)
and ``alpha_star`` (sign -1) per training point, minimizing

    1/2 a^T Q a + p^T a,  Q = s s^T * [K K; K K],  p = [eps - y; eps + y],
    subject to s^T a = 0, 0 <= a <= C,

which is the negated dual with coefficients ``beta = alpha - alpha_star`` and
decision function ``f(x) = sum_i beta_i K(x_i, x) + b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, EmptyDatasetError, InvalidHyperparameterError
from .kernels import KernelSpec, kernel_matrix

TAU = 1e-12


@dataclass(frozen=True, eq=False)
class SvrModel:
    train_features: np.ndarray
    kernel: KernelSpec
    dual_coeffs: np.ndarray
    bias: float
    C: float
    epsilon: float
    alpha: np.ndarray
    alpha_star: np.ndarray
    iterations: int = 0
    kkt_violation: float = 0.0
    tol: float = 0.0

    method = "svr"

    @property
    def hyperparameters(self):
        return {"C": self.C, "epsilon": self.epsilon, "gamma": self.kernel.gamma}

    def predict(self, X):
        return kernel_matrix(X, self.train_features, self.kernel) @ self.dual_coeffs + self.bias


def dual_objective(K, y, alpha, alpha_star, epsilon):
    """Dual value y.b - 1/2 b.K.b - eps * sum(alpha + alpha_star), b = alpha - alpha_star."""
    beta = alpha - alpha_star
    return float(y @ beta - 0.5 * beta @ K @ beta - epsilon * np.sum(alpha + alpha_star))


def _bias(sign, a, G, C, m_up, m_low):
    free = (a > 0) & (a < C)
    if np.any(free):
        return float(np.mean(-sign[free] * G[free]))
    return 0.5 * (m_up + m_low)


def svr_fit(train, kernel: KernelSpec, C, epsilon, tol=None, max_iter=None):
    """Fit by maximal-violating-pair SMO.

    Stops once the KKT gap ``max_{I_up} -sG - min_{I_low} -sG`` is at most
    ``tol`` (default 1e-3 times the label range).  Raises ConvergenceError if
    ``max_iter`` (default 100 N^2) pair updates do not get there.
    """
    if not C > 0:
        raise InvalidHyperparameterError(f"SVR C must be positive, got {C}")
    if not epsilon >= 0:
        raise InvalidHyperparameterError(f"SVR epsilon must be non-negative, got {epsilon}")
    n = len(train)
    if n == 0:
        raise EmptyDatasetError("SVR needs at least one training row")
    X = np.array(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.float64)
    C = float(C)
    epsilon = float(epsilon)
    if tol is None:
        tol = 1e-3 * float(y.max() - y.min())
    tol = max(tol, 1e-12 * max(1.0, float(np.abs(y).max())))
    if max_iter is None:
        max_iter = 100 * n * n

    K = kernel_matrix(X, X, kernel)
    sign = np.concatenate([np.ones(n), -np.ones(n)])
    both = np.concatenate([np.arange(n), np.arange(n)])
    Q = sign[:, None] * sign[None, :] * K[np.ix_(both, both)]
    QD = np.diag(Q).copy()
    a = np.zeros(2 * n)
    G = np.concatenate([epsilon - y, epsilon + y])
    pos = sign > 0

    it = 0
    while True:
        score = -sign * G
        up = np.where(pos, a < C, a > 0)
        low = np.where(pos, a > 0, a < C)
        up_score = np.where(up, score, -np.inf)
        low_score = np.where(low, score, np.inf)
        i = int(np.argmax(up_score))
        j = int(np.argmin(low_score))
        m_up, m_low = up_score[i], low_score[j]
        gap = m_up - m_low
        if gap <= tol:
            break
        if it >= max_iter:
            raise ConvergenceError(
                f"SVR did not converge in {max_iter} pair updates (KKT violation {gap:.3g} > {tol:.3g})",
                violation=float(gap),
            )
        it += 1

        ai, aj = a[i], a[j]
        Qi, Qj = Q[i], Q[j]
        if sign[i] != sign[j]:
            quad = QD[i] + QD[j] + 2.0 * Qi[j]
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = QD[i] + QD[j] - 2.0 * Qi[j]
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        a[i], a[j] = ni, nj
        G += Qi * (ni - ai) + Qj * (nj - aj)

    alpha, alpha_star = a[:n].copy(), a[n:].copy()
    beta = alpha - alpha_star
    bias = _bias(sign, a, G, C, m_up, m_low)
    for arr in (X, beta, alpha, alpha_star):
        arr.setflags(write=False)
    return SvrModel(X, kernel, beta, bias, C, epsilon, alpha, alpha_star, it, float(gap), float(tol))


def kkt_violations(model: SvrModel, train, tol=None):
    """Names of the optimality conditions ``model`` breaks on ``train`` (empty when none).

    Checks the box, the equality constraint (to 1e-8 C N) and complementary
    slackness: points strictly inside the tube carry no weight, and points at
    the bound +-C sit on or outside it.  ``tol`` defaults to the solver tolerance.
    """
    tol = model.tol if tol is None else tol
    C, eps = model.C, model.epsilon
    beta = model.dual_coeffs
    out = []
    if np.any(model.alpha < 0) or np.any(model.alpha > C) or np.any(model.alpha_star < 0) \
            or np.any(model.alpha_star > C):
        out.append("box")
    if abs(beta.sum()) > 1e-8 * C * len(beta):
        out.append("equality")
    resid = np.abs(np.asarray(train.labels) - model.predict(train.features))
    inside = resid < eps - tol
    if np.any(inside & (beta != 0)):
        out.append("inside-tube-weight")
    at_bound = (model.alpha == C) | (model.alpha_star == C)
    if np.any(at_bound & (resid < eps - tol)):
        out.append("bound-inside-tube")
    return out


def svr_predict(model: SvrModel, x):
    return float(model.predict(np.reshape(x, (1, -1)))[0])
