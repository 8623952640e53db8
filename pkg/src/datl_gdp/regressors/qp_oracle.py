"""Dense projected-gradient solver for the SVR dual, used to cross-check SMO.

Works directly on the (alpha, alpha_star) box with the exact Euclidean
projection onto {0 <= z <= C, sum(alpha) = sum(alpha_star)}.  Only meant for
tiny problems.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError, InvalidHyperparameterError, SizeError
from .kernels import KernelSpec, kernel_matrix

MAX_ORACLE_N = 64


def project_box_hyperplane(v, signs, C):
    """Euclidean projection of ``v`` onto {0 <= z <= C, signs . z = 0}.

    The projection is clip(v - lam * signs, 0, C) for the multiplier ``lam`` at
    which signs . z(lam) = 0; that function is piecewise linear and
    non-increasing in lam, so the root is found exactly between breakpoints.
    """
    if C == 0:
        return np.zeros_like(v)
    breaks = np.unique(np.concatenate([np.where(signs > 0, v, -v),
                                       np.where(signs > 0, v - C, C - v)]))

    def h(lam):
        return np.clip(v[None, :] - np.outer(lam, signs), 0.0, C) @ signs

    vals = h(breaks)
    hits = np.flatnonzero(vals == 0.0)
    if hits.size:
        lam = breaks[hits[0]]
    else:
        k = int(np.flatnonzero(vals > 0)[-1])
        lo, hi = breaks[k], breaks[k + 1]
        lam = lo + vals[k] * (hi - lo) / (vals[k] - vals[k + 1])
    return np.clip(v - lam * signs, 0.0, C)


def qp_oracle(train, kernel: KernelSpec, C, epsilon, tol=1e-8, max_iter=2_000_000):
    """Maximize the SVR dual by accelerated projected gradient ascent from zero.

    Returns ``(dual_coeffs, objective)`` where dual_coeffs = alpha - alpha_star
    and objective = y.b - 1/2 b.K.b - eps * sum(alpha + alpha_star).  Iterates
    until the gradient-mapping norm is at most ``tol``.
    """
    n = len(train)
    if n > MAX_ORACLE_N:
        raise SizeError(f"dense QP oracle handles at most {MAX_ORACLE_N} points, got {n}")
    if C < 0 or epsilon < 0:
        raise InvalidHyperparameterError("C and epsilon must be non-negative")
    y = np.asarray(train.labels, dtype=np.float64)
    K = kernel_matrix(train.features, train.features, kernel)
    signs = np.concatenate([np.ones(n), -np.ones(n)])

    def objective(z):
        b = z[:n] - z[n:]
        return float(y @ b - 0.5 * b @ K @ b - epsilon * z.sum())

    def gradient(z):
        r = y - K @ (z[:n] - z[n:])
        return np.concatenate([r - epsilon, -r - epsilon])

    z = np.zeros(2 * n)
    if C == 0 or n == 0:
        return z[:n] - z[n:], objective(z)

    lipschitz = max(2.0 * float(np.linalg.eigvalsh(K).max()), 1e-12)
    step = 1.0 / lipschitz
    w = z.copy()
    t = 1.0
    f_prev = objective(z)
    mapping = np.inf
    for _ in range(max_iter):
        z_new = project_box_hyperplane(w + step * gradient(w), signs, C)
        f_new = objective(z_new)
        if f_new < f_prev:
            # momentum overshot: restart with a plain projected step from z
            t = 1.0
            z_new = project_box_hyperplane(z + step * gradient(z), signs, C)
            f_new = objective(z_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        w = z_new + ((t - 1.0) / t_new) * (z_new - z)
        z, t, f_prev = z_new, t_new, f_new
        mapping = lipschitz * np.linalg.norm(project_box_hyperplane(z + step * gradient(z), signs, C) - z)
        if mapping <= tol:
            return z[:n] - z[n:], objective(z)
    raise ConvergenceError(f"QP oracle did not reach gradient-mapping norm {tol}", violation=float(mapping))


def oracle_bias(train, kernel: KernelSpec, dual_coeffs, C, epsilon, slack=1e-7):
    """Offset consistent with the KKT conditions of a dual solution.

    Averages y_i - f_0(x_i) -/+ eps over points strictly inside the box; with
    none, takes the midpoint of the feasible interval implied by bound points.
    """
    y = np.asarray(train.labels, dtype=np.float64)
    beta = np.asarray(dual_coeffs, dtype=np.float64)
    f0 = kernel_matrix(train.features, train.features, kernel) @ beta
    scale = slack * max(C, 1.0)
    free_pos = (beta > scale) & (beta < C - scale)
    free_neg = (beta < -scale) & (beta > -C + scale)
    cands = np.concatenate([(y - f0 - epsilon)[free_pos], (y - f0 + epsilon)[free_neg]])
    if cands.size:
        return float(cands.mean())
    # beta = 0: |y - f| <= eps; beta = C: y - f >= eps; beta = -C: y - f <= -eps
    lo, hi = -np.inf, np.inf
    for yi, fi, bi in zip(y, f0, beta):
        if bi >= C - scale:
            hi = min(hi, yi - fi - epsilon)
        elif bi <= -C + scale:
            lo = max(lo, yi - fi + epsilon)
        else:
            lo = max(lo, yi - fi - epsilon)
            hi = min(hi, yi - fi + epsilon)
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    return float(lo if np.isfinite(lo) else hi)
