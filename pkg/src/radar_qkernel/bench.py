"""Experimental protocol: seeded splits, test-time noise, per-cell runs, aggregation."""

from __future__ import annotations

import concurrent.futures as cf
import hashlib
import multiprocessing as mp
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .datasets import TASKS, Dataset
from .features import AngularScaler, FeaturePipeline
from .kernels import fidelity_kernel, rbf_gamma_scale, rbf_gram
from .svm import MulticlassModel, predict_ovo, train_ovo

PROTOCOL_SEEDS = (7, 11, 21, 42, 84)
PROTOCOL_DIMS = (2, 4, 6, 8)
PROTOCOL_SIGMAS = (0.0, 0.10, 0.25, 0.50)
NOISE_DIMS = (4, 6, 8)
KERNELS = ("rbf", "quantum")
TEST_FRACTION = 0.25


class BenchmarkError(RuntimeError):
    pass


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    test_fraction: float
    mode: str
    train_ids: np.ndarray  # row indices
    test_ids: np.ndarray
    train_clips: tuple = ()
    test_clips: tuple = ()


def _stratified(labels: np.ndarray, seed: int, test_fraction: float):
    gen = np.random.default_rng(seed)
    test = []
    for c in np.unique(labels):
        rows = np.flatnonzero(labels == c)
        k = _round_half_up(test_fraction * rows.size)
        test.extend(gen.permutation(rows)[:k].tolist())
    return np.sort(np.asarray(test, dtype=np.int64))


def _clip_level(labels, clip_ids, seed, test_fraction):
    clips = np.unique(clip_ids)
    clip_label = {int(c): int(labels[np.flatnonzero(clip_ids == c)[0]]) for c in clips}
    order = [int(c) for c in np.random.default_rng(seed).permutation(clips)]
    by_class: dict[int, list[int]] = {}
    for c in order:
        by_class.setdefault(clip_label[c], []).append(c)
    # Classes take turns in the order their first clip appears in the shuffle,
    # which keeps held-out class counts as even as the clip supply allows.
    # Every class needs at least one held-out clip, even for tiny clip counts.
    n_test = max(_round_half_up(test_fraction * clips.size), len(by_class))
    quota = {k: 0 for k in by_class}
    turn = list(by_class)
    remaining = n_test
    while remaining > 0:
        progressed = False
        for k in turn:
            if remaining == 0:
                break
            if quota[k] < len(by_class[k]) - 1:
                quota[k] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            break
    test_clips = sorted(c for k in by_class for c in by_class[k][: quota[k]])
    return test_clips, sorted(set(int(c) for c in clips) - set(test_clips))


def make_split(dataset: Dataset, seed: int, mode: str | None = None, test_fraction: float = TEST_FRACTION) -> SplitPlan:
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    mode = mode or ("clip_level" if dataset.clip_ids is not None else "stratified_sample")
    labels = np.asarray(dataset.labels)
    if mode == "stratified_sample":
        test = _stratified(labels, seed, test_fraction)
        test_clips = train_clips = ()
    elif mode == "clip_level":
        if dataset.clip_ids is None:
            raise ValueError("clip_level split needs clip ids")
        test_clips, train_clips = _clip_level(labels, dataset.clip_ids, seed, test_fraction)
        test = np.flatnonzero(np.isin(dataset.clip_ids, test_clips))
        test_clips, train_clips = tuple(test_clips), tuple(train_clips)
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    train = np.setdiff1d(np.arange(len(dataset)), test)
    for part, rows in (("train", train), ("test", test)):
        missing = set(np.unique(labels).tolist()) - set(np.unique(labels[rows]).tolist())
        if missing:
            raise ValueError(f"classes {sorted(missing)} absent from the {part} partition (seed {seed})")
    return SplitPlan(seed, test_fraction, mode, train, test, train_clips, test_clips)


def _sigma_key(sigma: float) -> int:
    return int(round(sigma * 1_000_000))


def inject_noise(test_arrays, s_train: float, sigma: float, seed: int, sample_ids=None) -> np.ndarray:
    """Add N(0, (sigma * s_train)^2) to raw test arrays.

    Each sample's stream is keyed by ``(seed, sigma, sample id)``. ``sigma = 0``
    returns the inputs unchanged.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    X = np.asarray(test_arrays, dtype=float)
    if sigma == 0:
        return X.copy()
    ids = np.arange(len(X)) if sample_ids is None else np.asarray(sample_ids)
    out = np.empty_like(X)
    scale = sigma * s_train
    for k, (x, sid) in enumerate(zip(X, ids)):
        gen = np.random.default_rng(np.random.SeedSequence([seed, _sigma_key(sigma), int(sid)]))
        out[k] = x + scale * gen.standard_normal(x.shape)
    return out


@dataclass(frozen=True)
class RunRecord:
    task: str
    d: int
    kernel: str
    sigma: float
    seed: int
    accuracy: float
    n_test: int
    model_digest: str = field(default="", compare=False)


@dataclass(frozen=True)
class Aggregate:
    task: str
    d: int
    kernel: str
    sigma: float
    mean_accuracy: float
    std_accuracy: float | None
    n_seeds: int


@dataclass
class BenchConfig:
    tasks: tuple = TASKS
    seeds: tuple = PROTOCOL_SEEDS
    dims: tuple = PROTOCOL_DIMS
    kernels: tuple = KERNELS
    sigmas: tuple = PROTOCOL_SIGMAS
    noise_dims: tuple = NOISE_DIMS
    C: float = 1.0
    tol: float = 1e-3
    test_fraction: float = TEST_FRACTION
    threads: int = 1


@dataclass
class BenchmarkReport:
    records: list[RunRecord]
    aggregates: list[Aggregate]
    models: dict = field(default_factory=dict, repr=False)
    splits: dict = field(default_factory=dict, repr=False)


def model_digest(model: MulticlassModel) -> str:
    h = hashlib.sha256()
    for pair in sorted(model.pairwise):
        m = model.pairwise[pair]
        h.update(repr(pair).encode())
        h.update(np.asarray(m.support_indices, dtype=np.int64).tobytes())
        h.update(np.float64(m.bias).tobytes())
    return h.hexdigest()[:16]


def _kernel_fns(kind: str, z_train: np.ndarray, angular: AngularScaler):
    if kind == "rbf":
        gamma = rbf_gamma_scale(z_train)
        return rbf_gram(z_train, z_train, gamma), lambda z: rbf_gram(z, z_train, gamma)
    if kind == "quantum":
        a_train = angular.transform(z_train)
        return fidelity_kernel(a_train), lambda z: fidelity_kernel(angular.transform(z), a_train)
    raise ValueError(f"unknown kernel {kind!r}")


def run_cell(dataset: Dataset, seed: int, cfg: BenchConfig):
    """All (d, kernel, sigma) results for one (task, seed) pair."""
    task = dataset.task
    plan = make_split(dataset, seed, test_fraction=cfg.test_fraction)
    n_pix = int(np.prod(dataset.shape))
    X_train = dataset.products[plan.train_ids].reshape(-1, n_pix).astype(float)
    X_test = dataset.products[plan.test_ids].reshape(-1, n_pix).astype(float)
    y_train = dataset.labels[plan.train_ids]
    y_test = dataset.labels[plan.test_ids]

    noise_dims = set(cfg.noise_dims) if any(s > 0 for s in cfg.sigmas) else set()
    dims = sorted(set(cfg.dims) | noise_dims)
    pipe = FeaturePipeline.fit(X_train, max(dims))
    z_train = pipe.pca_features(X_train)
    z_test = {0.0: pipe.pca_features(X_test)}

    # s_train: spread of every pixel of every training product.
    s_train = float(X_train.std())
    for sigma in cfg.sigmas:
        noisy = inject_noise(X_test, s_train, sigma, seed, sample_ids=plan.test_ids)
        feats = pipe.pca_features(noisy)
        if sigma == 0:
            if not np.array_equal(feats, z_test[0.0]):
                raise BenchmarkError("sigma=0 noise cell does not reproduce the clean features")
            continue
        z_test[sigma] = feats
    del X_train, X_test

    records, models = [], {}
    for d, kind in product(dims, cfg.kernels):
        try:
            # Leading-d slices of the max-d projection equal a d-component fit.
            zt = z_train[:, :d]
            angular = AngularScaler(pipe.angular.min[:d], pipe.angular.max[:d])
            gram, rows_for = _kernel_fns(kind, zt, angular)
            model = train_ovo(gram, y_train, cfg.C, cfg.tol)
        except Exception as exc:
            raise BenchmarkError(f"task={task} seed={seed} d={d} kernel={kind}: {exc}") from exc
        digest = model_digest(model)
        models[(task, seed, d, kind)] = model
        for sigma, z in z_test.items():
            if sigma != 0 and d not in noise_dims:
                continue
            if sigma == 0 and d not in cfg.dims and d not in noise_dims:
                continue
            pred = predict_ovo(model, rows_for(z[:, :d]))
            correct = int(np.sum(pred == y_test))
            records.append(
                RunRecord(task, d, kind, float(sigma), seed, correct / len(y_test), len(y_test), digest)
            )
    return records, models, plan


_WORKER_DATA: dict = {}


def _worker_init(datasets):
    _WORKER_DATA.update(datasets)


def _worker(task, seed, cfg):
    return run_cell(_WORKER_DATA[task], seed, cfg)


def _sort_key(cfg: BenchConfig):
    def key(r: RunRecord):
        return (
            TASKS.index(r.task),
            r.d,
            cfg.kernels.index(r.kernel),
            r.sigma,
            list(cfg.seeds).index(r.seed),
        )

    return key


def run_benchmark(cfg: BenchConfig, datasets: dict[str, Dataset]) -> BenchmarkReport:
    jobs = [(task, seed) for task in cfg.tasks for seed in cfg.seeds]
    for task in cfg.tasks:
        if task not in datasets:
            raise BenchmarkError(f"no dataset for task {task!r}")
    results = {}
    if cfg.threads > 1 and len(jobs) > 1:
        ctx = mp.get_context("fork")
        subset = {t: datasets[t] for t in cfg.tasks}
        with cf.ProcessPoolExecutor(cfg.threads, mp_context=ctx, initializer=_worker_init, initargs=(subset,)) as ex:
            futures = {ex.submit(_worker, task, seed, cfg): (task, seed) for task, seed in jobs}
            for fut in cf.as_completed(futures):
                results[futures[fut]] = fut.result()
    else:
        for task, seed in jobs:
            results[(task, seed)] = run_cell(datasets[task], seed, cfg)

    records, models, splits = [], {}, {}
    for job in jobs:
        recs, mods, plan = results[job]
        records.extend(recs)
        models.update(mods)
        splits[job] = plan
    records.sort(key=_sort_key(cfg))
    return BenchmarkReport(records, aggregate(records), models, splits)


def aggregate(records) -> list[Aggregate]:
    """Mean and sample standard deviation (n-1) over seeds per (task, d, kernel, sigma)."""
    cells: dict[tuple, list[float]] = {}
    for r in records:
        cells.setdefault((r.task, r.d, r.kernel, r.sigma), []).append(r.accuracy)
    out = []
    for (task, d, kind, sigma), accs in cells.items():
        a = np.asarray(accs, dtype=float)
        std = float(a.std(ddof=1)) if a.size >= 2 else None
        out.append(Aggregate(task, d, kind, sigma, float(a.mean()), std, int(a.size)))
    order = {k: i for i, k in enumerate(KERNELS)}
    out.sort(key=lambda g: (TASKS.index(g.task) if g.task in TASKS else 99, g.d, order.get(g.kernel, 99), g.sigma))
    return out
