import numpy as np
import pytest

from radar_qkernel.bench import (
    BenchConfig,
    RunRecord,
    aggregate,
    inject_noise,
    make_split,
    run_benchmark,
    run_cell,
)
from radar_qkernel.datasets import Dataset
from radar_qkernel.radar_sim import fall_config, uav_config


def _uav_like(n_per_class=200):
    labels = np.repeat([0, 1, 2], n_per_class)
    return Dataset("uav", np.zeros((labels.size, 1, 1), np.float32), labels, ("a", "b", "c"), uav_config(), 0)


def _fall_like(n_clips=16, windows=30):
    clips = np.repeat(np.arange(n_clips), windows)
    labels = clips % 2
    return Dataset(
        "fall",
        np.zeros((clips.size, 1, 1), np.float32),
        labels,
        ("non_fall", "fall"),
        fall_config(),
        0,
        clip_ids=clips,
        window_index=np.tile(np.arange(windows), n_clips),
    )


@pytest.mark.parametrize("seed", [7, 11, 21, 42, 84])
def test_uav_split_counts(seed):
    ds = _uav_like()
    plan = make_split(ds, seed)
    assert plan.train_ids.size == 450 and plan.test_ids.size == 150
    assert np.bincount(ds.labels[plan.test_ids]).tolist() == [50, 50, 50]
    assert not set(plan.train_ids.tolist()) & set(plan.test_ids.tolist())


@pytest.mark.parametrize("seed", [7, 11, 21, 42, 84])
def test_fall_clip_split(seed):
    ds = _fall_like()
    plan = make_split(ds, seed)
    assert plan.mode == "clip_level"
    assert len(plan.test_clips) == 4 and len(plan.train_clips) == 12
    assert set(ds.clip_ids[plan.test_ids]) == set(plan.test_clips)
    assert not set(ds.clip_ids[plan.train_ids]) & set(ds.clip_ids[plan.test_ids])
    assert set(ds.labels[plan.test_ids]) == {0, 1}


def test_split_determinism():
    ds = _fall_like()
    a, b = make_split(ds, 7), make_split(ds, 7)
    assert np.array_equal(a.test_ids, b.test_ids) and a.test_clips == b.test_clips


def test_split_errors():
    with pytest.raises(ValueError):
        make_split(_uav_like(), 7, mode="random")
    with pytest.raises(ValueError):
        make_split(_uav_like(), 7, mode="clip_level")


def test_noise_statistics():
    gen = np.random.default_rng(0)
    X = gen.random((20, 128, 64))
    s_train = 0.8
    for sigma in (0.10, 0.25, 0.50):
        noisy = inject_noise(X, s_train, sigma, seed=7)
        diff = noisy - X
        assert diff.size >= 100_000
        assert diff.std() == pytest.approx(sigma * s_train, rel=0.02)
        assert np.array_equal(noisy, inject_noise(X, s_train, sigma, seed=7))
    assert np.array_equal(inject_noise(X, s_train, 0.0, seed=7), X)
    with pytest.raises(ValueError):
        inject_noise(X, s_train, -0.1, seed=7)


def test_noise_keyed_by_sample_id():
    X = np.zeros((3, 4, 4))
    full = inject_noise(X, 1.0, 0.1, seed=7, sample_ids=[10, 11, 12])
    part = inject_noise(X[1:], 1.0, 0.1, seed=7, sample_ids=[11, 12])
    np.testing.assert_array_equal(full[1:], part)


def test_aggregate_examples():
    recs = [RunRecord("uav", 2, "rbf", 0.0, s, 0.9, 10) for s in range(5)]
    [g] = aggregate(recs)
    assert g.mean_accuracy == pytest.approx(0.9) and g.std_accuracy == pytest.approx(0.0) and g.n_seeds == 5
    [g] = aggregate([RunRecord("fall", 2, "quantum", 0.0, s, a, 10) for s, a in ((7, 1.0), (11, 0.0))])
    assert g.mean_accuracy == 0.5 and g.std_accuracy == pytest.approx(0.7071, abs=1e-4)
    [g] = aggregate(recs[:1])
    assert g.std_accuracy is None


def test_run_cell_model_reuse(small_uav):
    cfg = BenchConfig(tasks=("uav",), seeds=(7,), dims=(2, 4), noise_dims=(4,), sigmas=(0.0, 0.1, 0.5))
    records, models, plan = run_cell(small_uav, 7, cfg)
    clean = {(r.d, r.kernel): r for r in records if r.sigma == 0}
    assert len(clean) == 4
    for r in records:
        assert r.model_digest == clean[(r.d, r.kernel)].model_digest
        assert r.n_test == plan.test_ids.size
    assert {(r.d, r.sigma) for r in records if r.sigma > 0} == {(4, 0.1), (4, 0.5)}


def test_benchmark_shape_and_determinism(small_uav, small_fall):
    cfg = BenchConfig(seeds=(7, 11), dims=(2, 4), noise_dims=(4,), sigmas=(0.0, 0.25))
    data = {"uav": small_uav, "fall": small_fall}
    a = run_benchmark(cfg, data)
    assert len([r for r in a.records if r.sigma == 0]) == 2 * 2 * 2 * 2
    assert len([r for r in a.records if r.sigma > 0]) == 2 * 2 * 1 * 2
    b = run_benchmark(BenchConfig(**{**cfg.__dict__, "threads": 2}), data)
    assert a.records == b.records
    assert [r.model_digest for r in a.records] == [r.model_digest for r in b.records]
    assert a.aggregates == b.aggregates
    for r in a.records:
        assert 0.0 <= r.accuracy <= 1.0
