"""Independent reference solvers used by the self-test and the test suite."""

from __future__ import annotations

import numpy as np

from .svm import dual_objective


def _project(v: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection onto ``{0 <= a <= C, y.a = 0}``.

    ``g(lam) = y . clip(v - lam y, 0, C)`` is piecewise linear and non-increasing,
    so the root is located exactly between two sorted breakpoints.
    """
    breaks = np.unique(np.concatenate([v * y, (v - C) * y]))
    vals = (y[None, :] * np.clip(v[None, :] - breaks[:, None] * y[None, :], 0.0, C)).sum(axis=1)
    if vals[0] <= 0:
        lam = breaks[0]
    elif vals[-1] >= 0:
        lam = breaks[-1]
    else:
        k = int(np.flatnonzero(vals > 0)[-1])
        l0, l1, g0, g1 = breaks[k], breaks[k + 1], vals[k], vals[k + 1]
        lam = l0 if g0 == g1 else l0 + g0 * (l1 - l0) / (g0 - g1)
    return np.clip(v - lam * y, 0.0, C)


def _polish(alpha, Q, y, C, eps=1e-7):
    """Solve the KKT system exactly on the free set guessed from ``alpha``."""
    free = (alpha > eps) & (alpha < C - eps)
    a = np.where(alpha >= C - eps, C, 0.0)
    if not free.any():
        return a
    F = np.flatnonzero(free)
    B = np.flatnonzero(~free)
    nf = F.size
    lhs = np.zeros((nf + 1, nf + 1))
    lhs[:nf, :nf] = Q[np.ix_(F, F)]
    lhs[:nf, nf] = y[F]
    lhs[nf, :nf] = y[F]
    rhs = np.empty(nf + 1)
    rhs[:nf] = 1.0 - Q[np.ix_(F, B)] @ a[B]
    rhs[nf] = -y[B] @ a[B]
    sol = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    a[F] = sol[:nf]
    return a


def svm_dual_oracle(gram, y, C: float, iters: int = 5000) -> tuple[np.ndarray, float]:
    """Maximize the SVM dual by accelerated projected gradient plus an active-set polish.

    Meant for tiny problems (n <= ~30); returns ``(alpha, objective)``.
    """
    K = np.asarray(gram, dtype=float)
    y = np.asarray(y, dtype=float)
    Q = (y[:, None] * y[None, :]) * K
    L = max(float(np.linalg.eigvalsh(Q).max()), 1e-12)
    a = np.zeros(y.size)
    z = a.copy()
    t = 1.0
    for _ in range(iters):
        a_next = _project(z - (Q @ z - 1.0) / L, y, C)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = a_next + ((t - 1.0) / t_next) * (a_next - a)
        a, t = a_next, t_next
    best, best_obj = a, dual_objective(a, K, y)
    polished = _polish(a, Q, y, C)
    feasible = (
        np.all(polished >= -1e-12) and np.all(polished <= C + 1e-12) and abs(y @ polished) < 1e-10
    )
    if feasible:
        polished = np.clip(polished, 0.0, C)
        obj = dual_objective(polished, K, y)
        if obj >= best_obj:
            best, best_obj = polished, obj
    return best, best_obj
