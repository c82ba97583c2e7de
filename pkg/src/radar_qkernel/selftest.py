"""Oracle-equivalence and invariant checks that back the ``selftest`` command.

Each check returns a :class:`CheckResult`; none of them touches the
filesystem, and all draw from fixed seeds so repeated runs agree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .kernels import check_gram, fidelity_kernel, oracle_kernel, rbf_gamma_scale, rbf_gram
from .oracles import svm_dual_oracle
from .products import form_rdm, predicted_cell
from .radar_sim import Scatterer, Scene, synthesize_cube, uav_config
from .svm import BinaryProblem, alpha_vector, dual_objective, kkt_violation, solve_smo


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_kernel_oracle(n_pairs: int = 200, max_d: int = 8, tol: float = 1e-10, seed: int = 0) -> CheckResult:
    """Closed-form fidelity kernel against the gate-by-gate statevector."""
    gen = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for d in range(1, max_d + 1):
        X = gen.uniform(0, np.pi, (n_pairs, d))
        Y = gen.uniform(0, np.pi, (n_pairs, d))
        closed = np.array([fidelity_kernel(x[None], y[None])[0, 0] for x, y in zip(X, Y)])
        ref = np.array([oracle_kernel(x, y) for x, y in zip(X, Y)])
        worst = max(worst, float(np.max(np.abs(closed - ref))))
    elapsed = time.perf_counter() - t0
    ok = worst < tol and elapsed < 10.0
    return CheckResult("quantum kernel vs gate-level oracle", ok, f"max |diff| {worst:.2e}, {elapsed:.2f} s")


def check_single_qubit(n: int = 100, tol: float = 1e-12) -> CheckResult:
    """One qubit: the kernel is cos^2(y - x)."""
    grid = np.linspace(0, np.pi, n)[:, None]
    K = fidelity_kernel(grid)
    expected = np.cos(grid - grid.T) ** 2
    worst = float(np.max(np.abs(K - expected)))
    return CheckResult("single-qubit kernel equals cos^2", worst < tol, f"max |diff| {worst:.2e}")


def check_gram_validity(n_sets: int = 50, seed: int = 1) -> CheckResult:
    gen = np.random.default_rng(seed)
    worst_sym = worst_diag = 0.0
    min_eig = np.inf
    failures = 0
    for _ in range(n_sets):
        n, d = int(gen.integers(2, 65)), int(gen.integers(1, 9))
        Z = gen.normal(size=(n, d))
        for K in (rbf_gram(Z, Z, rbf_gamma_scale(Z)), fidelity_kernel(gen.uniform(0, np.pi, (n, d)))):
            worst_sym = max(worst_sym, float(np.max(np.abs(K - K.T))))
            worst_diag = max(worst_diag, float(np.max(np.abs(np.diag(K) - 1))))
            min_eig = min(min_eig, float(np.linalg.eigvalsh((K + K.T) / 2).min()))
            try:
                check_gram(K, "check")
            except ValueError:
                failures += 1
    ok = failures == 0 and worst_sym <= 1e-12 and worst_diag <= 1e-12 and min_eig >= -1e-9
    return CheckResult(
        "Gram symmetry, unit diagonal, PSD",
        ok,
        f"asym {worst_sym:.1e}, diag {worst_diag:.1e}, min eig {min_eig:.1e}",
    )


def check_svm_oracle(n_problems: int = 50, tol: float = 1e-5, rel: float = 1e-6, seed: int = 2) -> CheckResult:
    """SMO dual objective against a projected-gradient QP reference."""
    gen = np.random.default_rng(seed)
    worst_rel = worst_kkt = 0.0
    for _ in range(n_problems):
        n = int(gen.integers(4, 21))
        X = gen.normal(size=(n, int(gen.integers(1, 5))))
        y = np.where(gen.random(n) < 0.5, 1.0, -1.0)
        y[0], y[1] = 1.0, -1.0
        C = float(gen.choice([0.1, 1.0, 10.0]))
        K = rbf_gram(X, X, rbf_gamma_scale(X)) if gen.random() < 0.5 else fidelity_kernel(gen.uniform(0, np.pi, X.shape))
        model = solve_smo(BinaryProblem(K, y, C), tol=tol)
        alpha = alpha_vector(model, y)
        obj = dual_objective(alpha, K, y)
        _, ref = svm_dual_oracle(K, y, C)
        worst_rel = max(worst_rel, abs(obj - ref) / max(1.0, abs(ref)))
        # Per-sample KKT at the SMO bias, measured in the solver's own gap units.
        worst_kkt = max(worst_kkt, kkt_violation(alpha, K, y, C, model.bias))
    ok = worst_rel <= rel and worst_kkt <= tol
    return CheckResult(
        "SMO vs QP oracle", ok, f"max rel objective gap {worst_rel:.1e}, max KKT violation {worst_kkt:.1e}"
    )


def check_rdm_placement(n_scenes: int = 100, seed: int = 3) -> CheckResult:
    """Single static-or-moving point scatterers land in their predicted RDM cell."""
    config = uav_config()
    gen = np.random.default_rng(seed)
    r_max = config.range_bin_m * (config.n_range_bins - 2)
    v_max = config.max_velocity_mps - 2 * config.velocity_bin_mps
    worst_r = worst_v = 0
    for _ in range(n_scenes):
        R = float(gen.uniform(2.0, r_max - 1.0))
        v = float(gen.uniform(-v_max, v_max))
        scene = Scene([Scatterer([R, 0.0, 0.0], [v, 0.0, 0.0], 1.0)], label=0)
        rdm = form_rdm(synthesize_cube(scene, config, noise_db=None)).values
        row, col = np.unravel_index(int(np.argmax(rdm)), rdm.shape)
        p_row, p_col = predicted_cell(config, R, v)
        worst_r = max(worst_r, abs(int(col) - p_col))
        worst_v = max(worst_v, abs(int(row) - p_row))
    ok = worst_r <= 1 and worst_v <= 1
    return CheckResult("RDM peak placement", ok, f"max range offset {worst_r} bins, max Doppler offset {worst_v} bins")


def run_all() -> list[CheckResult]:
    return [
        check_kernel_oracle(),
        check_single_qubit(),
        check_gram_validity(),
        check_svm_oracle(),
        check_rdm_placement(),
    ]
