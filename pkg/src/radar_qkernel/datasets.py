"""Dataset assembly for both tracks and the on-disk container format.

A container is a directory holding ``manifest.txt`` (``key=value`` lines) and
one ``sample_<index>.bin`` per product with row-major little-endian float32
values. Products are always held as float32 so in-memory and reloaded
datasets feed identical bits to the benchmark.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .products import SPECTROGRAM_FRAMES, WINDOW_STRIDE, cut_windows, doppler_profile, form_rdm
from .radar_sim import (
    FALL_CLASSES,
    UAV_CLASSES,
    RadarConfig,
    fall_config,
    generate_fall_clips,
    generate_uav_dataset,
    iter_clip_cubes,
    uav_config,
)

MANIFEST = "manifest.txt"
TASKS = ("uav", "fall")


class ManifestError(ValueError):
    pass


@dataclass
class Dataset:
    task: str
    products: np.ndarray  # [n, rows, cols] float32
    labels: np.ndarray
    class_names: tuple[str, ...]
    config: RadarConfig
    seed: int
    clip_ids: np.ndarray | None = None
    window_index: np.ndarray | None = None

    def __post_init__(self):
        if self.products.ndim != 3:
            raise ValueError("products must be [n, rows, cols]")
        if len(self.labels) != len(self.products):
            raise ValueError("one label per product is required")
        if (self.clip_ids is not None) != (self.task == "fall"):
            raise ValueError("clip ids are required for the fall track and only there")

    def __len__(self) -> int:
        return len(self.products)

    @property
    def shape(self) -> tuple[int, int]:
        return self.products.shape[1:]


def build_uav_dataset(n_per_class: int = 200, seed: int = 7, config: RadarConfig | None = None) -> Dataset:
    config = config or uav_config()
    samples = generate_uav_dataset(n_per_class, config, seed)
    products = np.empty((len(samples), config.n_chirps, config.n_range_bins), dtype=np.float32)
    labels = np.empty(len(samples), dtype=np.int64)
    for i in range(len(samples)):
        scene, cube = samples[i]
        products[i] = form_rdm(cube).values
        labels[i] = scene.label
    return Dataset("uav", products, labels, UAV_CLASSES, config, seed)


def build_fall_dataset(
    n_clips: int = 16,
    seed: int = 7,
    config: RadarConfig | None = None,
    T: int = SPECTROGRAM_FRAMES,
    stride: int = WINDOW_STRIDE,
    **clip_kwargs,
) -> Dataset:
    config = config or fall_config()
    windows, labels, clips, index = [], [], [], []
    for clip in generate_fall_clips(n_clips, config, seed, **clip_kwargs):
        profiles = np.stack([doppler_profile(c) for c in iter_clip_cubes(clip, config, seed)], axis=1)
        for w, win in enumerate(cut_windows(profiles, T, stride)):
            windows.append(win.astype(np.float32))
            labels.append(clip.label)
            clips.append(clip.clip_id)
            index.append(w)
    return Dataset(
        "fall",
        np.stack(windows),
        np.asarray(labels, dtype=np.int64),
        FALL_CLASSES,
        config,
        seed,
        clip_ids=np.asarray(clips, dtype=np.int64),
        window_index=np.asarray(index, dtype=np.int64),
    )


def _ints(values) -> str:
    return ",".join(str(int(v)) for v in values)


def save_dataset(ds: Dataset, path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    n, rows, cols = ds.products.shape
    lines = [
        f"task={ds.task}",
        f"n_samples={n}",
        f"rows={rows}",
        f"cols={cols}",
        f"classes={','.join(ds.class_names)}",
        f"labels={_ints(ds.labels)}",
    ]
    if ds.clip_ids is not None:
        lines.append(f"clip_ids={_ints(ds.clip_ids)}")
        lines.append(f"window_index={_ints(ds.window_index)}")
    lines.append(f"generator_seed={ds.seed}")
    lines.append(f"config={json.dumps(ds.config.to_dict(), sort_keys=True)}")
    (path / MANIFEST).write_text("\n".join(lines) + "\n")
    for i in range(n):
        (path / f"sample_{i}.bin").write_bytes(ds.products[i].astype("<f4").tobytes(order="C"))
    return path


def _parse_manifest(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if "=" not in line:
            raise ManifestError(f"manifest line {lineno} is not key=value: {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_ints(s: str) -> np.ndarray:
    return np.asarray([int(v) for v in s.split(",")] if s else [], dtype=np.int64)


def load_dataset(path) -> Dataset:
    path = Path(path)
    manifest = path / MANIFEST
    if not manifest.is_file():
        raise FileNotFoundError(f"no {MANIFEST} in {path}")
    meta = _parse_manifest(manifest.read_text())
    required = ("task", "n_samples", "rows", "cols", "classes", "labels", "generator_seed", "config")
    missing = [k for k in required if k not in meta]
    if missing:
        raise ManifestError(f"manifest {manifest} is missing keys: {', '.join(missing)}")
    try:
        task = meta["task"]
        n, rows, cols = int(meta["n_samples"]), int(meta["rows"]), int(meta["cols"])
        labels = _parse_ints(meta["labels"])
        clip_ids = _parse_ints(meta["clip_ids"]) if "clip_ids" in meta else None
        window_index = _parse_ints(meta["window_index"]) if "window_index" in meta else None
        config = RadarConfig(**json.loads(meta["config"]))
        seed = int(meta["generator_seed"])
    except (ValueError, TypeError) as exc:
        raise ManifestError(f"malformed manifest {manifest}: {exc}") from exc
    if task not in TASKS:
        raise ManifestError(f"unknown task {task!r} in {manifest}")
    if len(labels) != n or (clip_ids is not None and len(clip_ids) != n):
        raise ManifestError(f"manifest {manifest}: per-sample lists do not match n_samples={n}")

    products = np.empty((n, rows, cols), dtype=np.float32)
    for i in range(n):
        f = path / f"sample_{i}.bin"
        if not f.is_file():
            raise FileNotFoundError(f"missing sample file {f}")
        raw = np.frombuffer(f.read_bytes(), dtype="<f4")
        if raw.size != rows * cols:
            raise ManifestError(f"{f} holds {raw.size} values, expected {rows * cols}")
        products[i] = raw.reshape(rows, cols)
    return Dataset(
        task,
        products,
        labels,
        tuple(meta["classes"].split(",")),
        config,
        seed,
        clip_ids=clip_ids,
        window_index=window_index,
    )
