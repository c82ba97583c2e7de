"""RBF and ZZ-feature-map fidelity kernels.

The reps=1 ZZ feature map is a Hadamard layer followed by gates that are all
diagonal in the computational basis, so the encoded state is

    |psi(x)> = 2^(-d/2) * sum_z exp(i theta_z(x)) |z>

and the fidelity kernel reduces to a normalized sum of phase differences.
``statevector_oracle`` rebuilds the same state gate by gate as an independent
check on that closed form.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

MAX_QUBITS = 12


def _features(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2D")
    return X


def rbf_gamma_scale(train) -> float:
    """``1 / (n_features * var)`` with the population variance of all entries pooled."""
    X = _features(train, "train")
    if X.size == 0:
        raise ValueError("empty training matrix")
    var = float(X.var())
    if var == 0:
        raise ValueError("pooled feature variance is zero; gamma='scale' is undefined")
    return 1.0 / (X.shape[1] * var)


def rbf_gram(X, Y, gamma: float) -> np.ndarray:
    X, Y = _features(X), _features(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"feature dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    diff = X[:, None, :] - Y[None, :, :]
    return np.exp(-gamma * np.einsum("ijk,ijk->ij", diff, diff))


def _bits(d: int) -> np.ndarray:
    """``[2^d, d]`` table with ``bits[z, i] = (z >> i) & 1``."""
    z = np.arange(2**d)
    return ((z[:, None] >> np.arange(d)[None, :]) & 1).astype(float)


def zz_phase(x, z: int) -> float:
    """Diagonal phase the reps=1 circuit leaves on basis state ``z``."""
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    b = [(z >> i) & 1 for i in range(d)]
    theta = sum(2.0 * x[i] * b[i] for i in range(d))
    for i, j in combinations(range(d), 2):
        theta += 2.0 * (np.pi - x[i]) * (np.pi - x[j]) * (b[i] ^ b[j])
    return float(theta)


def phase_table(X) -> np.ndarray:
    """``theta_z(x)`` for every row of ``X`` and every basis index: shape ``[n, 2^d]``."""
    X = _features(X)
    d = X.shape[1]
    if d > MAX_QUBITS:
        raise ValueError(f"d={d} exceeds the {MAX_QUBITS}-qubit guardrail")
    bits = _bits(d)
    theta = 2.0 * X @ bits.T
    comp = np.pi - X
    for i, j in combinations(range(d), 2):
        parity = bits[:, i] != bits[:, j]
        theta[:, parity] += 2.0 * (comp[:, i] * comp[:, j])[:, None]
    return theta


def fidelity_kernel(X, Y=None) -> np.ndarray:
    """``|<psi(x_i)|psi(y_j)>|^2`` for angle features in ``[0, pi]``.

    Phase tables are built once per sample, so a Gram costs
    ``O(n 2^d d^2 + n m 2^d)``.
    """
    X = _features(X)
    Y = X if Y is None else _features(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"feature dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    d = X.shape[1]
    amp_x = np.exp(1j * phase_table(X))
    amp_y = amp_x if Y is X else np.exp(1j * phase_table(Y))
    overlap = (amp_x.conj() @ amp_y.T) / 2**d
    return np.abs(overlap) ** 2


# --- gate-level oracle ----------------------------------------------------


def _hadamard(state: np.ndarray, q: int, d: int) -> np.ndarray:
    s = state.reshape((2,) * d)
    axis = d - 1 - q  # qubit q is bit q of the basis index
    a = np.take(s, 0, axis=axis)
    b = np.take(s, 1, axis=axis)
    return np.stack([(a + b), (a - b)], axis=axis).reshape(-1) / np.sqrt(2.0)


def _phase(state: np.ndarray, q: int, lam: float) -> np.ndarray:
    idx = np.arange(state.size)
    out = state.copy()
    out[(idx >> q) & 1 == 1] *= np.exp(1j * lam)
    return out


def _cx(state: np.ndarray, control: int, target: int) -> np.ndarray:
    idx = np.arange(state.size)
    src = np.where((idx >> control) & 1 == 1, idx ^ (1 << target), idx)
    return state[src]


def statevector_oracle(x) -> np.ndarray:
    """Apply H, P(2 x_i), and CX-P-CX pair blocks explicitly to ``|0...0>``."""
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    if d < 1 or d > MAX_QUBITS:
        raise ValueError(f"oracle supports 1..{MAX_QUBITS} qubits, got {d}")
    state = np.zeros(2**d, dtype=complex)
    state[0] = 1.0
    for q in range(d):
        state = _hadamard(state, q, d)
    for q in range(d):
        state = _phase(state, q, 2.0 * x[q])
    for i, j in combinations(range(d), 2):
        state = _cx(state, i, j)
        state = _phase(state, j, 2.0 * (np.pi - x[i]) * (np.pi - x[j]))
        state = _cx(state, i, j)
    return state


def oracle_kernel(x, y) -> float:
    return float(abs(np.vdot(statevector_oracle(x), statevector_oracle(y))) ** 2)


def check_gram(K: np.ndarray, kind: str, tol: float = 1e-12, eig_tol: float = 1e-9) -> None:
    """Raise if a square train Gram breaks symmetry, unit diagonal, range, or PSD bounds."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("Gram matrix must be square")
    if np.max(np.abs(K - K.T), initial=0.0) > tol:
        raise ValueError("Gram matrix is not symmetric")
    if np.max(np.abs(np.diag(K) - 1.0), initial=0.0) > tol:
        raise ValueError("Gram matrix diagonal is not 1")
    if K.min(initial=1.0) < -tol or K.max(initial=0.0) > 1.0 + tol:
        raise ValueError(f"{kind} kernel entries outside the admissible range")
    if K.size and np.linalg.eigvalsh((K + K.T) / 2).min() < -eig_tol:
        raise ValueError("Gram matrix is not positive semidefinite")
