"""Range-Doppler maps and Doppler-time spectrograms from IQ cubes."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, replace

import numpy as np

from .radar_sim import IqCube, RadarConfig

SPECTROGRAM_FRAMES = 64
WINDOW_STRIDE = 16


@dataclass(frozen=True)
class Axis:
    kind: str
    spacing: float


@dataclass
class RadarProduct:
    """Linear-magnitude 2D radar image with axis metadata."""

    values: np.ndarray
    row_axis: Axis
    col_axis: Axis
    label: int | None = None
    clip_id: int | None = None
    window_index: int | None = None

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("radar product must be 2D")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("radar product values must be finite and non-negative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def rx_average(cube: IqCube) -> IqCube:
    """Coherent mean over receive channels."""
    if cube.config.n_rx == 1:
        return cube
    cfg = replace(cube.config, n_rx=1)
    return IqCube(cube.samples.mean(axis=0, keepdims=True), cfg)


def _range_fft(x: np.ndarray) -> np.ndarray:
    # x: [n_chirps, n_fast]
    return np.fft.fft(x * np.hanning(x.shape[-1]), axis=-1)


def _doppler_fft(x: np.ndarray) -> np.ndarray:
    # Transform along the chirp axis (0) with DC moved to the centre row.
    win = np.hanning(x.shape[0]).reshape((-1,) + (1,) * (x.ndim - 1))
    return np.fft.fftshift(np.fft.fft(x * win, axis=0), axes=0)


def rdm_full(cube: IqCube) -> np.ndarray:
    """Complex range-Doppler spectrum over all fast-time bins (no truncation)."""
    if cube.config.n_rx != 1:
        raise ValueError(f"range-Doppler maps need a single channel, got n_rx={cube.config.n_rx}")
    return _doppler_fft(_range_fft(cube.samples[0]))


def form_rdm(cube: IqCube, label: int | None = None) -> RadarProduct:
    """``|FFT_slow{FFT_fast{x}}|`` with Hann windows, truncated to the usable range bins."""
    cfg = cube.config
    values = np.abs(rdm_full(cube))[:, : cfg.n_range_bins]
    return RadarProduct(
        values,
        row_axis=Axis("doppler", cfg.velocity_bin_mps),
        col_axis=Axis("range", cfg.range_bin_m),
        label=label,
    )


def doppler_profile(cube: IqCube) -> np.ndarray:
    """Doppler magnitude profile at the range bin holding the most energy."""
    cube = rx_average(cube)
    spec = _range_fft(cube.samples[0])[:, : cube.config.n_range_bins]
    k = int(np.argmax(np.sum(np.abs(spec) ** 2, axis=0)))
    return np.abs(_doppler_fft(spec[:, k]))


def cut_windows(profiles: np.ndarray, T: int = SPECTROGRAM_FRAMES, stride: int = WINDOW_STRIDE) -> list[np.ndarray]:
    """Slice a ``[n_doppler, n_frames]`` profile stack into ``T``-frame windows."""
    n = profiles.shape[1]
    if n < T:
        raise ValueError(f"need at least {T} frames, got {n}")
    return [profiles[:, s : s + T] for s in range(0, n - T + 1, stride)]


def form_spectrogram(
    frames: Iterable[IqCube],
    T: int = SPECTROGRAM_FRAMES,
    stride: int = WINDOW_STRIDE,
    label: int | None = None,
    clip_id: int | None = None,
) -> list[RadarProduct]:
    """Stack per-frame Doppler profiles and cut ``[n_chirps, T]`` windows.

    Window ``w`` covers frames ``[w * stride, w * stride + T)``.
    """
    cfg = None
    cols = []
    for cube in frames:
        cfg = cube.config
        cols.append(doppler_profile(cube))
    if len(cols) < T:
        raise ValueError(f"need at least {T} frames, got {len(cols)}")
    stack = np.stack(cols, axis=1)
    return [
        RadarProduct(
            w,
            row_axis=Axis("doppler", cfg.velocity_bin_mps),
            col_axis=Axis("time", cfg.frame_period_s),
            label=label,
            clip_id=clip_id,
            window_index=i,
        )
        for i, w in enumerate(cut_windows(stack, T, stride))
    ]


def predicted_cell(config: RadarConfig, range_m: float, radial_velocity_mps: float) -> tuple[int, int]:
    """(row, col) where a point target should peak in the RDM."""
    col = int(round(range_m / config.range_bin_m))
    row = int(round(radial_velocity_mps / config.velocity_bin_mps)) + config.n_chirps // 2
    return row, col
