import numpy as np
import pytest

from radar_qkernel.kernels import rbf_gram
from radar_qkernel.oracles import svm_dual_oracle
from radar_qkernel.svm import (
    BinaryProblem,
    ConvergenceError,
    alpha_vector,
    dual_objective,
    kkt_violation,
    predict_ovo,
    solve_smo,
    train_ovo,
)


def linear_gram(X, Y=None):
    Y = X if Y is None else Y
    return np.atleast_2d(X) @ np.atleast_2d(Y).T


def test_two_point_hand_solution():
    # Dual: max 2a - 2a^2 gives a = 1/2 on both points, w = 1, b = 0.
    X = np.array([[-1.0], [1.0]])
    y = np.array([-1.0, 1.0])
    model = solve_smo(BinaryProblem(linear_gram(X), y, C=100.0), tol=1e-10)
    np.testing.assert_allclose(alpha_vector(model, y), [0.5, 0.5], atol=1e-9)
    assert model.bias == pytest.approx(0.0, abs=1e-9)
    assert sorted(model.support_indices.tolist()) == [0, 1]
    mid = model.decision_from_full(linear_gram(np.array([[0.0]]), X))
    assert mid[0] == pytest.approx(0.0, abs=1e-9)


def test_contradictory_duplicates():
    X = np.zeros((4, 2))
    y = np.array([1.0, -1.0, 1.0, -1.0])
    C = 0.7
    model = solve_smo(BinaryProblem(rbf_gram(X, X, 1.0), y, C))
    np.testing.assert_allclose(alpha_vector(model, y), C)


def test_xor_against_oracle():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    K = rbf_gram(X, X, 1.0)
    model = solve_smo(BinaryProblem(K, y, C=10.0), tol=1e-6)
    assert np.all(model.predict_binary(K[:, model.support_indices]) == y)
    alpha = alpha_vector(model, y)
    _, ref = svm_dual_oracle(K, y, 10.0)
    assert dual_objective(alpha, K, y) == pytest.approx(ref, rel=1e-6)


def test_free_support_vectors_on_margin():
    gen = np.random.default_rng(0)
    X = gen.normal(size=(30, 2))
    y = np.where(X[:, 0] + 0.3 * gen.normal(size=30) > 0, 1.0, -1.0)
    K = rbf_gram(X, X, 0.5)
    C, tol = 1.0, 1e-6
    model = solve_smo(BinaryProblem(K, y, C), tol=tol)
    alpha = alpha_vector(model, y)
    f = model.decision_from_full(K)
    free = (alpha > 0) & (alpha < C)
    assert free.any()
    np.testing.assert_allclose(np.abs(f[free]), 1.0, atol=10 * tol)
    assert kkt_violation(alpha, K, y, C, model.bias) <= tol


def test_label_flip_negates_decisions():
    gen = np.random.default_rng(1)
    X = gen.normal(size=(25, 3))
    y = np.where(gen.random(25) < 0.5, 1.0, -1.0)
    K = rbf_gram(X, X, 0.3)
    Xt = gen.normal(size=(6, 3))
    rows = rbf_gram(Xt, X, 0.3)
    a = solve_smo(BinaryProblem(K, y, 1.0), tol=1e-8).decision_from_full(rows)
    b = solve_smo(BinaryProblem(K, -y, 1.0), tol=1e-8).decision_from_full(rows)
    np.testing.assert_allclose(a, -b, atol=1e-6)


def test_debug_mode_monotone_objective():
    gen = np.random.default_rng(2)
    X = gen.normal(size=(20, 2))
    y = np.where(X[:, 1] > 0, 1.0, -1.0)
    solve_smo(BinaryProblem(rbf_gram(X, X, 1.0), y, 5.0), debug=True)


def test_convergence_error_reports_violation():
    gen = np.random.default_rng(3)
    X = gen.normal(size=(20, 2))
    y = np.where(X[:, 1] > 0, 1.0, -1.0)
    with pytest.raises(ConvergenceError) as info:
        solve_smo(BinaryProblem(rbf_gram(X, X, 1.0), y, 5.0), tol=1e-12, max_passes=1)
    assert info.value.worst_violation > 0


@pytest.mark.parametrize(
    "gram,y,C",
    [
        (np.eye(2), [1, 1], 1.0),
        (np.eye(2), [1, 0], 1.0),
        (np.eye(3), [1, -1], 1.0),
        (np.eye(2), [1, -1], 0.0),
    ],
)
def test_problem_validation(gram, y, C):
    with pytest.raises(ValueError):
        BinaryProblem(gram, y, C)


def test_ovo_two_classes_matches_binary():
    gen = np.random.default_rng(4)
    X = gen.normal(size=(24, 2))
    labels = (X[:, 0] > 0).astype(int)
    K = rbf_gram(X, X, 1.0)
    multi = train_ovo(K, labels)
    binary = solve_smo(BinaryProblem(K, np.where(labels == 0, 1.0, -1.0), 1.0))
    Xt = gen.normal(size=(10, 2))
    rows = rbf_gram(Xt, X, 1.0)
    expected = np.where(binary.decision_from_full(rows) > 0, 0, 1)
    np.testing.assert_array_equal(predict_ovo(multi, rows), expected)


def test_ovo_three_clouds():
    gen = np.random.default_rng(5)
    centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    X = np.vstack([c + 0.3 * gen.normal(size=(10, 2)) for c in centres])
    labels = np.repeat([0, 1, 2], 10)
    K = rbf_gram(X, X, 0.1)
    model = train_ovo(K, labels)
    assert len(model.pairwise) == 3
    np.testing.assert_array_equal(predict_ovo(model, K), labels)


def test_ovo_needs_two_classes():
    with pytest.raises(ValueError):
        train_ovo(np.eye(3), [1, 1, 1])


def test_oracle_agrees_with_cvxopt():
    cvxopt = pytest.importorskip("cvxopt")
    cvxopt.solvers.options["show_progress"] = False
    cvxopt.solvers.options["abstol"] = 1e-12
    cvxopt.solvers.options["reltol"] = 1e-12
    cvxopt.solvers.options["feastol"] = 1e-12
    gen = np.random.default_rng(6)
    for _ in range(5):
        n = 12
        X = gen.normal(size=(n, 2))
        y = np.where(gen.random(n) < 0.5, 1.0, -1.0)
        y[:2] = [1.0, -1.0]
        K = rbf_gram(X, X, 0.8)
        C = 2.0
        P = cvxopt.matrix(np.outer(y, y) * K)
        q = cvxopt.matrix(-np.ones(n))
        G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
        h = cvxopt.matrix(np.r_[np.zeros(n), C * np.ones(n)])
        A = cvxopt.matrix(y[None, :])
        sol = cvxopt.solvers.qp(P, q, G, h, A, cvxopt.matrix(0.0))
        ref = dual_objective(np.array(sol["x"]).ravel(), K, y)
        _, obj = svm_dual_oracle(K, y, C)
        assert obj == pytest.approx(ref, rel=1e-7)
