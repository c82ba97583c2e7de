"""Support vector classification on precomputed Gram matrices.

The binary solver is SMO on the standard dual

    max  sum(a) - 1/2 a^T Q a,   Q_ij = y_i y_j K_ij,
    s.t. 0 <= a_i <= C,  sum(a_i y_i) = 0,

with the maximal-violating-pair working set. Multiclass problems are
composed one-vs-one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

TAU = 1e-12


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, worst_violation: float):
        super().__init__(message)
        self.worst_violation = worst_violation


@dataclass(frozen=True)
class BinaryProblem:
    gram: np.ndarray
    y: np.ndarray
    C: float = 1.0

    def __post_init__(self):
        gram = np.asarray(self.gram, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        n = y.size
        if gram.shape != (n, n):
            raise ValueError(f"gram shape {gram.shape} does not match {n} labels")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if not (np.any(y > 0) and np.any(y < 0)):
            raise ValueError("both classes must be present")
        if not self.C > 0:
            raise ValueError("C must be positive")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class SvmModel:
    alpha_y: np.ndarray
    support_indices: np.ndarray
    bias: float
    kind: str = "precomputed"
    n_iter: int = 0

    def decision_value(self, k_rows) -> np.ndarray | float:
        """``sum_i alpha_i y_i K(x_i, x) + bias`` for kernel rows against the support set."""
        k = np.asarray(k_rows, dtype=float)
        if k.shape[-1] != self.support_indices.size:
            raise ValueError(
                f"kernel row has {k.shape[-1]} entries, model has {self.support_indices.size} support vectors"
            )
        out = k @ self.alpha_y + self.bias
        return float(out) if np.ndim(out) == 0 else out

    def decision_from_full(self, k_full) -> np.ndarray:
        """Decision values from rows against the whole training set."""
        k_full = np.asarray(k_full, dtype=float)
        return self.decision_value(k_full[..., self.support_indices])

    def predict_binary(self, k_rows) -> np.ndarray:
        return np.where(np.asarray(self.decision_value(k_rows)) > 0, 1, -1)


def dual_objective(alpha: np.ndarray, gram: np.ndarray, y: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ gram @ ay)


def _violations(yG, alpha, y, C):
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    return up, low


def kkt_violation(alpha, gram, y, C, bias) -> float:
    """Largest per-sample KKT violation of ``y_i f(x_i)`` against the margin."""
    margin = y * (gram @ (alpha * y) + bias)
    viol = np.zeros_like(margin)
    free = (alpha > 0) & (alpha < C)
    lower = alpha <= 0
    upper = alpha >= C
    viol[lower] = np.maximum(0.0, 1.0 - margin[lower])
    viol[upper] = np.maximum(0.0, margin[upper] - 1.0)
    viol[free] = np.abs(margin[free] - 1.0)
    return float(viol.max(initial=0.0))


def default_max_passes(n: int) -> int:
    return max(100_000, 1000 * n)


def solve_smo(
    problem: BinaryProblem,
    tol: float = 1e-3,
    max_passes: int | None = None,
    debug: bool = False,
) -> SvmModel:
    """Train a binary SVM; ``max_passes`` caps the number of pair updates.

    On return every sample meets its KKT condition within ``tol``. With
    ``debug=True`` the dual objective is asserted non-decreasing per update.
    """
    K, y, C = problem.gram, problem.y, float(problem.C)
    n = y.size
    limit = default_max_passes(n) if max_passes is None else int(max_passes)
    Q = (y[:, None] * y[None, :]) * K
    diagQ = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    last_obj = 0.0

    it = 0
    while True:
        yG = -y * G
        up, low = _violations(yG, alpha, y, C)
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, yG, -np.inf)))
        j = int(np.argmin(np.where(low, yG, np.inf)))
        gap = yG[i] - yG[j]
        if gap < tol:
            break
        if it >= limit:
            raise ConvergenceError(
                f"SMO did not converge in {limit} updates (worst KKT gap {gap:.3e})", float(gap)
            )
        it += 1

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diagQ[i] + diagQ[j] + 2.0 * Q[i, j]
            quad = quad if quad > 0 else TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diagQ[i] + diagQ[j] - 2.0 * Q[i, j]
            quad = quad if quad > 0 else TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total

        di, dj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        G += Q[:, i] * di + Q[:, j] * dj

        if debug:
            obj = dual_objective(alpha, K, y)
            assert obj >= last_obj - 1e-12 * max(1.0, abs(obj)), "dual objective decreased"
            last_obj = obj

    yG = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(yG[free].mean())
    else:
        up, low = _violations(yG, alpha, y, C)
        hi = yG[up].max() if up.any() else yG.max()
        lo = yG[low].min() if low.any() else yG.min()
        bias = float(0.5 * (hi + lo))

    support = np.flatnonzero(alpha > 0)
    return SvmModel(alpha[support] * y[support], support, bias, n_iter=it)


def alpha_vector(model: SvmModel, y: np.ndarray) -> np.ndarray:
    """Dense dual coefficients over the training rows the model was fitted on."""
    y = np.asarray(y, dtype=float)
    alpha = np.zeros(y.size)
    alpha[model.support_indices] = model.alpha_y * y[model.support_indices]
    return alpha


@dataclass(frozen=True)
class MulticlassModel:
    classes: tuple
    pairwise: dict  # (class_a, class_b) -> SvmModel with global support indices; a is +1

    def __post_init__(self):
        k = len(self.classes)
        if len(self.pairwise) != k * (k - 1) // 2:
            raise ValueError("one binary model per class pair is required")


def train_ovo(gram, labels, C: float = 1.0, tol: float = 1e-3, max_passes: int | None = None) -> MulticlassModel:
    gram = np.asarray(gram, dtype=float)
    labels = np.asarray(labels)
    classes = tuple(np.unique(labels).tolist())
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    pairwise = {}
    for a, b in combinations(classes, 2):
        rows = np.flatnonzero((labels == a) | (labels == b))
        y = np.where(labels[rows] == a, 1.0, -1.0)
        model = solve_smo(BinaryProblem(gram[np.ix_(rows, rows)], y, C), tol, max_passes)
        pairwise[(a, b)] = replace(model, support_indices=rows[model.support_indices])
    return MulticlassModel(classes, pairwise)


def predict_ovo(model: MulticlassModel, k_rows) -> np.ndarray:
    """Majority vote; ties go to the larger summed |decision| of won duels, then the lower class."""
    k_rows = np.atleast_2d(np.asarray(k_rows, dtype=float))
    m = k_rows.shape[0]
    idx = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((m, len(model.classes)))
    strength = np.zeros_like(votes)
    for (a, b), svm in model.pairwise.items():
        f = svm.decision_from_full(k_rows)
        win_a = f > 0
        votes[win_a, idx[a]] += 1
        votes[~win_a, idx[b]] += 1
        strength[win_a, idx[a]] += np.abs(f[win_a])
        strength[~win_a, idx[b]] += np.abs(f[~win_a])
    out = np.empty(m, dtype=np.asarray(model.classes).dtype)
    for r in range(m):
        top = np.flatnonzero(votes[r] == votes[r].max())
        best = top[np.argmax(strength[r, top])]  # argmax keeps the lowest index on equal strength
        out[r] = model.classes[best]
    return out
