"""Point-scatterer FMCW simulator producing dechirped baseband IQ cubes.

The radar sits at the origin looking along +x. Every scatterer contributes a
complex tone whose fast-time frequency is the beat frequency ``2 R S / c`` and
whose chirp-to-chirp phase advances by ``4 pi dR / lambda``. Rotor blades and
limb oscillations are expanded into extra point tracks before summation.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

SeedLike = Union[int, Sequence[int], np.random.SeedSequence]


class WindowError(ValueError):
    """A scatterer falls outside the unambiguous range/velocity window."""


@dataclass(frozen=True)
class RadarConfig:
    carrier_hz: float
    bandwidth_hz: float
    chirp_duration_s: float
    n_fast: int
    n_chirps: int
    n_rx: int = 1
    sample_rate_hz: float | None = None
    n_range_bins: int | None = None
    frame_period_s: float | None = None

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if not self.chirp_duration_s > 0:
            raise ValueError(f"chirp_duration_s must be positive, got {self.chirp_duration_s}")
        if not self.carrier_hz > 0:
            raise ValueError(f"carrier_hz must be positive, got {self.carrier_hz}")
        for name in ("n_fast", "n_chirps", "n_rx"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        # Default sampling spans the whole chirp, so one FFT bin equals c/(2B).
        if self.sample_rate_hz is None:
            object.__setattr__(self, "sample_rate_hz", self.n_fast / self.chirp_duration_s)
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.n_range_bins is None:
            object.__setattr__(self, "n_range_bins", self.n_fast)
        if not 1 <= self.n_range_bins <= self.n_fast:
            raise ValueError("n_range_bins must lie in [1, n_fast]")
        if self.frame_period_s is None:
            object.__setattr__(self, "frame_period_s", self.n_chirps * self.chirp_duration_s)
        if not np.isfinite(self.slope):
            raise ValueError("sweep slope is not finite")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def slope(self) -> float:
        return self.bandwidth_hz / self.chirp_duration_s

    @property
    def range_bin_m(self) -> float:
        """Range spacing of one fast-time FFT bin."""
        return SPEED_OF_LIGHT * self.sample_rate_hz / (2.0 * self.slope * self.n_fast)

    @property
    def max_range_m(self) -> float:
        return self.n_range_bins * self.range_bin_m

    @property
    def velocity_bin_mps(self) -> float:
        return self.wavelength / (2.0 * self.n_chirps * self.chirp_duration_s)

    @property
    def max_velocity_mps(self) -> float:
        return self.wavelength / (4.0 * self.chirp_duration_s)

    def to_dict(self) -> dict:
        return {
            "carrier_hz": self.carrier_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "chirp_duration_s": self.chirp_duration_s,
            "n_fast": self.n_fast,
            "n_chirps": self.n_chirps,
            "n_rx": self.n_rx,
            "sample_rate_hz": self.sample_rate_hz,
            "n_range_bins": self.n_range_bins,
            "frame_period_s": self.frame_period_s,
        }


def _chirp_for_velocity_resolution(carrier_hz: float, v_res: float, n_chirps: int) -> float:
    return SPEED_OF_LIGHT / carrier_hz / (2.0 * n_chirps * v_res)


def uav_config(**overrides) -> RadarConfig:
    """77 GHz / 300 MHz front end giving 128 x 510 range-Doppler maps."""
    params = dict(
        carrier_hz=77e9,
        bandwidth_hz=300e6,
        chirp_duration_s=_chirp_for_velocity_resolution(77e9, 0.4, 128),
        n_fast=512,
        n_chirps=128,
        n_rx=1,
        n_range_bins=510,
    )
    params.update(overrides)
    return RadarConfig(**params)


def fall_config(**overrides) -> RadarConfig:
    """60 GHz / 499.7 MHz front end; each frame yields a 256-bin Doppler profile."""
    params = dict(
        carrier_hz=60e9,
        bandwidth_hz=499.7e6,
        chirp_duration_s=_chirp_for_velocity_resolution(60e9, 0.095, 256),
        n_fast=32,
        n_chirps=256,
        n_rx=4,
        frame_period_s=0.05,
    )
    params.update(overrides)
    return RadarConfig(**params)


def fmcw_relations(config: RadarConfig) -> tuple[float, float, float]:
    """Return ``(slope, range_resolution, velocity_resolution)``."""
    if not (config.bandwidth_hz > 0 and config.chirp_duration_s > 0):
        raise ValueError("bandwidth and chirp duration must be positive")
    slope = config.bandwidth_hz / config.chirp_duration_s
    range_res = SPEED_OF_LIGHT / (2.0 * config.bandwidth_hz)
    return slope, range_res, config.velocity_bin_mps


def beat_range(config: RadarConfig, f_b: float) -> float:
    if f_b < 0:
        raise ValueError("beat frequency must be non-negative")
    return SPEED_OF_LIGHT * f_b / (2.0 * config.slope)


@dataclass(frozen=True)
class Rotor:
    blade_length_m: float
    rotation_hz: float
    n_blades: int = 2
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.blade_length_m < 0 or self.rotation_hz < 0:
            raise ValueError("blade length and rotation rate must be non-negative")
        if self.n_blades < 1:
            raise ValueError("a rotor needs at least one blade")

    @property
    def radius_m(self) -> float:
        # Blade-flash approximation: the effective scattering centre sits at 0.8 L.
        return 0.8 * self.blade_length_m


@dataclass(frozen=True)
class Oscillation:
    amplitude_m: float
    frequency_hz: float
    phase_rad: float = 0.0


@dataclass
class Scatterer:
    position_m: np.ndarray
    velocity_mps: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rcs: float = 1.0
    micro_motion: Rotor | Oscillation | None = None

    def __post_init__(self):
        self.position_m = np.asarray(self.position_m, dtype=float).reshape(3)
        self.velocity_mps = np.asarray(self.velocity_mps, dtype=float).reshape(3)
        if self.rcs < 0:
            raise ValueError("rcs must be non-negative")


@dataclass
class Scene:
    scatterers: list[Scatterer]
    label: int
    clip_id: int | None = None


@dataclass
class IqCube:
    samples: np.ndarray
    config: RadarConfig

    def __post_init__(self):
        c = self.config
        expected = (c.n_rx, c.n_chirps, c.n_fast)
        if self.samples.shape != expected:
            raise ValueError(f"cube shape {self.samples.shape} does not match config {expected}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("cube contains non-finite samples")


def _point_tracks(s: Scatterer, t: np.ndarray):
    """Expand one scatterer into ``(amplitude, range_track, azimuth)`` tuples."""
    centre = s.position_m[None, :] + t[:, None] * s.velocity_mps[None, :]
    azimuth = float(np.arctan2(s.position_m[1], s.position_m[0]))
    motion = s.micro_motion
    if isinstance(motion, Rotor):
        tracks = []
        r = motion.radius_m
        for k in range(motion.n_blades):
            psi = 2 * np.pi * motion.rotation_hz * t + motion.phase_rad + 2 * np.pi * k / motion.n_blades
            blade = centre.copy()
            blade[:, 0] += r * np.cos(psi)
            blade[:, 1] += r * np.sin(psi)
            tracks.append((s.rcs, np.linalg.norm(blade, axis=1), azimuth))
        return tracks
    rng = np.linalg.norm(centre, axis=1)
    if isinstance(motion, Oscillation):
        rng = rng + motion.amplitude_m * np.sin(2 * np.pi * motion.frequency_hz * t + motion.phase_rad)
    return [(s.rcs, rng, azimuth)]


def _check_window(track: np.ndarray, config: RadarConfig) -> None:
    lo, hi = float(track.min()), float(track.max())
    if lo < 0 or hi >= config.max_range_m:
        raise WindowError(
            f"scatterer range [{lo:.3f}, {hi:.3f}] m outside unambiguous window "
            f"[0, {config.max_range_m:.3f}) m"
        )
    if track.size > 1:
        v = np.abs(np.diff(track)).max() / config.chirp_duration_s
        limit = config.max_velocity_mps - config.velocity_bin_mps
        if v > limit:
            raise WindowError(
                f"radial speed {v:.3f} m/s exceeds unambiguous limit {limit:.3f} m/s"
            )


def synthesize_cube(
    scene: Scene,
    config: RadarConfig,
    seed: SeedLike = 0,
    noise_db: float | None = -40.0,
) -> IqCube:
    """Render the dechirped baseband cube ``[n_rx, n_chirps, n_fast]`` of a scene.

    ``noise_db`` sets a complex Gaussian floor relative to the strongest
    scatterer amplitude; ``None`` disables it. The seed only drives that floor.
    """
    c = config
    t_slow = np.arange(c.n_chirps) * c.chirp_duration_s
    t_fast = np.arange(c.n_fast) / c.sample_rate_hz
    rx = np.arange(c.n_rx)
    out = np.zeros((c.n_rx, c.n_chirps, c.n_fast), dtype=np.complex128)

    for s in scene.scatterers:
        for amp, track, az in _point_tracks(s, t_slow):
            _check_window(track, c)
            if amp == 0:
                continue
            f_beat = 2.0 * c.slope * track / SPEED_OF_LIGHT
            phase = 2 * np.pi * np.outer(f_beat, t_fast) + (4 * np.pi / c.wavelength) * track[:, None]
            tone = amp * np.exp(1j * phase)
            # Half-wavelength uniform linear array.
            steer = np.exp(1j * np.pi * rx * np.sin(az))
            out += steer[:, None, None] * tone[None]

    if noise_db is not None and scene.scatterers:
        peak = max(s.rcs for s in scene.scatterers)
        if peak > 0:
            sigma = peak * 10.0 ** (noise_db / 20.0)
            gen = np.random.default_rng(seed)
            noise = gen.standard_normal(out.shape) + 1j * gen.standard_normal(out.shape)
            out += noise * (sigma / np.sqrt(2.0))
    return IqCube(out, config)


# --- UAV track ------------------------------------------------------------

UAV_CLASSES = ("helicopter", "hexacopter", "quadcopter")


@dataclass(frozen=True)
class AirframeParams:
    n_rotors: int
    arm_m: float
    blade_length_m: tuple[float, float]
    rotation_hz: tuple[float, float]
    n_blades: int
    body_rcs: tuple[float, float]
    blade_rcs: tuple[float, float]


AIRFRAMES = {
    0: AirframeParams(1, 0.0, (0.60, 0.70), (5.0, 6.0), 2, (0.7, 1.1), (0.3, 0.5)),
    1: AirframeParams(6, 0.45, (0.17, 0.20), (14.0, 17.0), 2, (0.5, 0.9), (0.1, 0.2)),
    2: AirframeParams(4, 0.17, (0.11, 0.13), (18.0, 22.0), 2, (0.3, 0.7), (0.06, 0.14)),
}

UAV_RANGE_M = (40.0, 46.0)
UAV_AZIMUTH_DEG = (-15.0, 15.0)
UAV_ELEVATION_DEG = (5.0, 15.0)
# A pixel-wise standardizer lifts any i.i.d. floor to unit variance across all
# 65k RDM cells, which buries the airframe structure; UAV maps are noise-free.
UAV_NOISE_DB = None
UAV_MAX_SPEED_MPS = 2.5


def uav_scene(label: int, gen: np.random.Generator) -> Scene:
    p = AIRFRAMES[label]
    rng_m = gen.uniform(*UAV_RANGE_M)
    az = np.deg2rad(gen.uniform(*UAV_AZIMUTH_DEG))
    el = np.deg2rad(gen.uniform(*UAV_ELEVATION_DEG))
    body = rng_m * np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])
    heading = gen.uniform(0, 2 * np.pi)
    speed = gen.uniform(0, UAV_MAX_SPEED_MPS)
    vel = speed * np.array([np.cos(heading), np.sin(heading), 0.0])

    scatterers = [Scatterer(body, vel, gen.uniform(*p.body_rcs))]
    blade_len = gen.uniform(*p.blade_length_m)
    blade_rcs = gen.uniform(*p.blade_rcs)
    for k in range(p.n_rotors):
        ang = heading + 2 * np.pi * k / p.n_rotors
        hub = body + p.arm_m * np.array([np.cos(ang), np.sin(ang), 0.0])
        rotor = Rotor(
            blade_length_m=blade_len,
            rotation_hz=gen.uniform(*p.rotation_hz),
            n_blades=p.n_blades,
            phase_rad=gen.uniform(0, 2 * np.pi),
        )
        scatterers.append(Scatterer(hub, vel, blade_rcs, rotor))
    return Scene(scatterers, label)


class UavDataset(Sequence):
    """Lazily rendered UAV samples, class-blocked: index ``i`` has label ``i // n_per_class``.

    Every sample draws from its own stream keyed by ``(seed, i)``, so any
    subset can be rendered in any order or in parallel with identical bits.
    """

    def __init__(self, n_per_class: int, config: RadarConfig, seed: int, noise_db: float | None = UAV_NOISE_DB):
        if n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        self.n_per_class = n_per_class
        self.config = config
        self.seed = seed
        self.noise_db = noise_db

    def __len__(self) -> int:
        return len(UAV_CLASSES) * self.n_per_class

    def label(self, i: int) -> int:
        return i // self.n_per_class

    def scene(self, i: int) -> Scene:
        scene_ss, _ = np.random.SeedSequence([self.seed, i]).spawn(2)
        return uav_scene(self.label(i), np.random.default_rng(scene_ss))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        _, noise_ss = np.random.SeedSequence([self.seed, i]).spawn(2)
        scene = self.scene(i)
        return scene, synthesize_cube(scene, self.config, noise_ss, self.noise_db)


def generate_uav_dataset(
    n_per_class: int, config: RadarConfig, seed: int, noise_db: float | None = UAV_NOISE_DB
) -> UavDataset:
    return UavDataset(n_per_class, config, seed, noise_db)


# --- Fall track -----------------------------------------------------------

FALL_CLASSES = ("non_fall", "fall")
FLOOR_Z = -1.0

# (name, height above floor, rcs, limb swing amplitude, swing phase)
_BODY_PARTS = (
    ("torso", 1.0, 1.0, 0.02, 0.0),
    ("leg_l", 0.45, 0.35, 0.12, 0.0),
    ("leg_r", 0.45, 0.35, 0.12, np.pi),
    ("arm_l", 1.2, 0.2, 0.08, np.pi),
    ("arm_r", 1.2, 0.2, 0.08, 0.0),
)


@dataclass
class FallClip:
    clip_id: int
    label: int
    activity: str
    frames: list[Scene]


def _unit(angle: float) -> np.ndarray:
    return np.array([np.cos(angle), np.sin(angle), 0.0])


def _smooth_ramp(s):
    s = np.clip(s, 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * s))


def _walk_kinematics(gen, duration):
    start = gen.uniform(2.0, 3.0)
    span = gen.uniform(1.5, 2.5)
    speed = gen.uniform(0.8, 1.3)
    direction = _unit(gen.uniform(-0.4, 0.4))
    lateral = gen.uniform(-0.5, 0.5)
    stride_hz = gen.uniform(0.8, 1.0)
    period = 2 * span / speed
    offset = gen.uniform(0, period)

    def centre(t):
        # Triangle wave: walk out and back along the heading.
        u = np.mod(t + offset, period) / period
        along = span * (1.0 - np.abs(2.0 * u - 1.0))
        return np.array([start, lateral, FLOOR_Z]) + along * direction

    def swing(part):
        name, _, _, amp, ph = part
        # Torso bobs twice per stride cycle.
        return Oscillation(amp, 2 * stride_hz if name == "torso" else stride_hz, ph)

    return centre, lambda t, part: np.zeros(3), swing


def _sit_kinematics(gen, duration):
    base = np.array([gen.uniform(2.0, 4.5), gen.uniform(-0.5, 0.5), FLOOR_Z])
    toward = _unit(gen.uniform(-0.5, 0.5))
    stand = gen.uniform(2.0, 4.0)
    seated = gen.uniform(2.0, 4.0)
    move = gen.uniform(1.2, 1.8)
    period = stand + seated + 2 * move
    offset = gen.uniform(0, period)

    def depth(t):
        u = np.mod(t + offset, period)
        if u < stand:
            return 0.0
        u -= stand
        if u < move:
            return float(_smooth_ramp(u / move))
        u -= move
        if u < seated:
            return 1.0
        u -= seated
        return float(1.0 - _smooth_ramp(u / move))

    def offset_fn(t, part):
        height = part[1]
        k = depth(t)
        # Upper body drops and shifts backwards; legs fold forward.
        if height > 0.8:
            return k * (-0.45 * np.array([0, 0, 1.0]) - 0.25 * toward)
        return k * (0.2 * toward + np.array([0, 0, 0.05]))

    def swing(part):
        if part[0] == "torso":
            return Oscillation(0.004, 0.3, part[4])
        return None

    return (lambda t: base), offset_fn, swing


def _fall_kinematics(gen, duration):
    base = np.array([gen.uniform(2.0, 4.5), gen.uniform(-0.5, 0.5), FLOOR_Z])
    sign = 1.0 if gen.uniform() < 0.5 else -1.0
    fall_dir = sign * _unit(gen.uniform(-0.5, 0.5))
    t0 = gen.uniform(1.0, min(5.0, 0.3 * duration))
    tf = gen.uniform(0.4, 0.7)

    def tilt(t):
        return 0.5 * np.pi * float(_smooth_ramp((t - t0) / tf))

    def offset_fn(t, part):
        height = part[1]
        th = tilt(t)
        # Rigid rotation about the feet towards the floor.
        upright = np.array([0, 0, height])
        fallen = height * (np.sin(th) * fall_dir + np.array([0, 0, np.cos(th)]))
        return fallen - upright

    def swing(part):
        if part[0] == "torso":
            return Oscillation(0.004, 0.25, part[4])
        return None

    return (lambda t: base), offset_fn, swing


_ACTIVITIES = {"walk": _walk_kinematics, "sit": _sit_kinematics, "fall": _fall_kinematics}


def _clip_frames(activity, label, clip_id, n_frames, config, gen):
    duration = n_frames * config.frame_period_s
    centre, offset_fn, swing = _ACTIVITIES[activity](gen, duration)
    phases = {p[0]: gen.uniform(0, 2 * np.pi) for p in _BODY_PARTS}

    def position(t, part):
        return centre(t) + np.array([0, 0, part[1]]) + offset_fn(t, part)

    h = 1e-4
    frames = []
    for f in range(n_frames):
        t = f * config.frame_period_s
        scatterers = []
        for part in _BODY_PARTS:
            pos = position(t, part)
            vel = (position(t + h, part) - position(t - h, part)) / (2 * h)
            osc = swing(part)
            if osc is not None:
                osc = Oscillation(
                    osc.amplitude_m,
                    osc.frequency_hz,
                    osc.phase_rad + phases[part[0]] + 2 * np.pi * osc.frequency_hz * t,
                )
            scatterers.append(Scatterer(pos, vel, part[2], osc))
        frames.append(Scene(scatterers, label, clip_id))
    return frames


FALL_FRAMES_RANGE = (480, 640)


def generate_fall_clips(
    n_clips: int,
    config: RadarConfig,
    seed: int,
    n_frames: int | tuple[int, int] = FALL_FRAMES_RANGE,
) -> list[FallClip]:
    """Kinematic fall / non-fall clips; even ``clip_id`` is non-fall, odd is fall.

    Non-fall clips alternate between walking and sit/stand cycles.
    """
    if n_clips < 2:
        raise ValueError("need at least two clips (one per class)")
    clips = []
    for cid in range(n_clips):
        gen = np.random.default_rng(np.random.SeedSequence([seed, cid]))
        if isinstance(n_frames, tuple):
            frames = int(gen.integers(n_frames[0], n_frames[1] + 1))
        else:
            frames = int(n_frames)
        label = cid % 2
        if label == 1:
            activity = "fall"
        else:
            activity = "walk" if (cid // 2) % 2 == 0 else "sit"
        clips.append(FallClip(cid, label, activity, _clip_frames(activity, label, cid, frames, config, gen)))
    return clips


def fall_frame_seed(seed: int, clip_id: int, frame: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, clip_id, frame, 1])


FALL_NOISE_DB = -40.0


def iter_clip_cubes(clip: FallClip, config: RadarConfig, seed: int, noise_db: float | None = FALL_NOISE_DB):
    """Render a clip frame by frame; noise streams are keyed by (seed, clip, frame)."""
    for f, scene in enumerate(clip.frames):
        yield synthesize_cube(scene, config, fall_frame_seed(seed, clip.clip_id, f), noise_db)
