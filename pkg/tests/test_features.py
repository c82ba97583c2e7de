import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from radar_qkernel.features import (
    AngularScaler,
    FeaturePipeline,
    PcaModel,
    Standardizer,
    flatten,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_standardize_hand_example():
    s = Standardizer.fit(np.array([[1.0], [3.0]]))
    np.testing.assert_allclose(s.transform(np.array([[1.0], [3.0]])), [[-1.0], [1.0]])


def test_constant_column_maps_to_zero():
    X = np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])
    Z = Standardizer.fit(X).transform(X)
    assert np.all(Z[:, 0] == 0.0)
    assert np.all(np.isfinite(Z))


@given(arrays(float, st.tuples(st.integers(2, 12), st.integers(1, 6)), elements=finite))
def test_train_mean_is_zero(X):
    # Columns whose spread sits at rounding level of their magnitude are ill-conditioned.
    spread, level = X.std(axis=0), 1.0 + np.abs(X).max(axis=0)
    assume(np.all((spread == 0) | (spread > 1e-8 * level)))
    Z = Standardizer.fit(X).transform(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-9)


def test_standardizer_is_train_only():
    gen = np.random.default_rng(0)
    train = gen.normal(size=(20, 5))
    s = Standardizer.fit(train)
    test_a = gen.normal(size=(4, 5))
    test_b = test_a.copy()
    test_b[0] += 100.0
    # Each test row is transformed independently of the other test rows.
    np.testing.assert_array_equal(s.transform(test_a)[1:], s.transform(test_b)[1:])


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        Standardizer.fit(np.array([[np.nan]]))


def test_pca_lossless_subspace():
    gen = np.random.default_rng(1)
    basis = np.linalg.qr(gen.normal(size=(10, 3)))[0].T
    X = gen.normal(size=(30, 3)) @ basis + gen.normal(size=10)
    Z = PcaModel.fit(X, 3).transform(X)
    dx = np.linalg.norm(X[:, None] - X[None], axis=-1)
    dz = np.linalg.norm(Z[:, None] - Z[None], axis=-1)
    np.testing.assert_allclose(dz, dx, atol=1e-8)


def test_pca_dominant_axis():
    gen = np.random.default_rng(2)
    X = np.array([[1.0, 0.0], [-1.0, 0.0]] * 10) + np.c_[np.zeros(20), 1e-4 * gen.normal(size=20)]
    p = PcaModel.fit(X, 1)
    assert abs(p.components[0] @ np.array([1.0, 0.0])) > 0.999


def test_explained_variance_nests():
    X = np.random.default_rng(3).normal(size=(40, 20))
    assert PcaModel.fit(X, 8).explained_variance_ratio() >= PcaModel.fit(X, 4).explained_variance_ratio()


def test_truncate_equals_refit():
    X = np.random.default_rng(4).normal(size=(30, 12))
    np.testing.assert_array_equal(PcaModel.fit(X, 8).truncate(4).components, PcaModel.fit(X, 4).components)


def test_pca_dimension_guard():
    X = np.zeros((5, 3))
    with pytest.raises(ValueError):
        PcaModel.fit(X, 5)
    with pytest.raises(ValueError):
        PcaModel.fit(X, 0)


def test_pca_sign_convention():
    X = np.random.default_rng(5).normal(size=(25, 6))
    comps = PcaModel.fit(X, 4).components
    assert np.all(comps[np.arange(4), np.argmax(np.abs(comps), axis=1)] > 0)
    np.testing.assert_allclose(comps @ comps.T, np.eye(4), atol=1e-12)


def test_angular_examples():
    a = AngularScaler.fit(np.array([[0.0], [1.0]]))
    np.testing.assert_allclose(a.transform(np.array([[0.0], [1.0]])), [[0.0], [np.pi]])
    assert a.transform(np.array([[-3.0]]))[0, 0] == 0.0
    assert a.transform(np.array([[4.0]]))[0, 0] == np.pi
    const = AngularScaler.fit(np.array([[2.0], [2.0]]))
    assert np.all(const.transform(np.array([[2.0], [7.0]])) == 0.0)


@given(arrays(float, st.tuples(st.integers(2, 10), st.integers(1, 4)), elements=finite))
def test_angular_range(X):
    out = AngularScaler.fit(X).transform(X * 3 - 1)
    assert np.all((out >= 0) & (out <= np.pi))


def test_pipeline_determinism_and_with_dim():
    gen = np.random.default_rng(6)
    train = gen.normal(size=(30, 50))
    test = gen.normal(size=(7, 50))
    p8 = FeaturePipeline.fit(train, 8)
    again = FeaturePipeline.fit(train, 8)
    assert np.array_equal(p8.angles(test), again.angles(test))
    p4 = FeaturePipeline.fit(train, 4)
    np.testing.assert_array_equal(p8.with_dim(4).pca.components, p4.pca.components)
    np.testing.assert_allclose(p8.with_dim(4).angles(test), p4.angles(test), atol=1e-12)


def test_flatten_products():
    stack = flatten([np.ones((2, 3)), np.zeros((2, 3))])
    assert stack.shape == (2, 6)
