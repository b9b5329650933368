"""Time series containers, CSV ingestion and the short-time Fourier transform."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from os import PathLike
from typing import Mapping, Sequence

import numpy as np
from scipy.signal import get_window

from .errors import InputError

WINDOW_KINDS = ("rectangular", "hann", "hamming")


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        samples = _frozen_array(self.samples, float)
        if samples.ndim != 1 or samples.size < 1:
            raise InputError("time series needs a 1-D array with at least one sample")
        if not self.sample_rate_hz > 0:
            raise InputError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "start_time_s", float(self.start_time_s))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.samples.size) / self.sample_rate_hz

    @property
    def nyquist_hz(self) -> float:
        return 0.5 * self.sample_rate_hz


@dataclass(frozen=True)
class FrequencyBand:
    f_min_hz: float
    f_max_hz: float

    def __post_init__(self):
        if not 0 < self.f_min_hz < self.f_max_hz:
            raise InputError(
                f"band needs 0 < f_min < f_max, got [{self.f_min_hz}, {self.f_max_hz}]"
            )

    @classmethod
    def around(cls, f_guess_hz: float, rel: float = 0.2) -> "FrequencyBand":
        """Band of +/- ``rel`` around a frequency guess."""
        return cls((1.0 - rel) * f_guess_hz, (1.0 + rel) * f_guess_hz)

    @property
    def width_hz(self) -> float:
        return self.f_max_hz - self.f_min_hz

    def mask(self, freqs_hz: np.ndarray) -> np.ndarray:
        # small slack so grid points computed as m*fs/N land inside closed bounds
        tol = 1e-9 * self.f_max_hz
        return (freqs_hz >= self.f_min_hz - tol) & (freqs_hz <= self.f_max_hz + tol)

    def overlaps(self, other: "FrequencyBand") -> bool:
        return self.f_min_hz <= other.f_max_hz and other.f_min_hz <= self.f_max_hz


@dataclass(frozen=True)
class StftConfig:
    window_length_samples: int
    hop_samples: int
    window_kind: str = "hann"
    pad_factor: int = 1

    def __post_init__(self):
        if self.window_length_samples < 1:
            raise InputError("window length must be >= 1")
        if not 1 <= self.hop_samples <= self.window_length_samples:
            raise InputError("hop must satisfy 1 <= hop <= window length")
        if self.window_kind not in WINDOW_KINDS:
            raise InputError(f"unknown window kind {self.window_kind!r}")
        if self.pad_factor < 1:
            raise InputError("pad factor must be >= 1")

    @property
    def n_fft(self) -> int:
        return self.window_length_samples * self.pad_factor

    def window(self) -> np.ndarray:
        if self.window_kind == "rectangular":
            return np.ones(self.window_length_samples)
        return get_window(self.window_kind, self.window_length_samples, fftbins=True)

    def bin_freqs_hz(self, sample_rate_hz: float) -> np.ndarray:
        return np.arange(self.n_fft // 2 + 1) * sample_rate_hz / self.n_fft

    def frame_count(self, n_samples: int) -> int:
        if n_samples < self.window_length_samples:
            return 0
        return (n_samples - self.window_length_samples) // self.hop_samples + 1


def default_stft_config(
    sample_rate_hz: float, bands: Sequence[FrequencyBand], points_per_band: int = 40
) -> StftConfig:
    """Hann window fine enough for ``points_per_band`` bins across the narrowest band."""
    narrowest = min(b.width_hz for b in bands)
    exact = points_per_band * sample_rate_hz / narrowest
    length = int(math.ceil(exact - 1e-9 * exact))
    return StftConfig(length, max(1, length // 2), "hann")


@dataclass(frozen=True)
class SpectrumFrame:
    """One-sided spectrum of a single STFT frame."""

    bin_values: np.ndarray
    bin_freqs_hz: np.ndarray
    frame_time_s: float
    window_id: str = "hann"

    def __post_init__(self):
        values = _frozen_array(self.bin_values, complex)
        freqs = _frozen_array(self.bin_freqs_hz, float)
        if values.shape != freqs.shape or values.ndim != 1:
            raise InputError("bin values and frequencies must be 1-D with equal length")
        if freqs.size and (freqs[0] < 0 or np.any(np.diff(freqs) <= 0)):
            raise InputError("bin frequencies must be non-negative and strictly increasing")
        object.__setattr__(self, "bin_values", values)
        object.__setattr__(self, "bin_freqs_hz", freqs)

    def same_grid(self, other: "SpectrumFrame") -> bool:
        return self.bin_freqs_hz.shape == other.bin_freqs_hz.shape and np.array_equal(
            self.bin_freqs_hz, other.bin_freqs_hz
        )


def stft_matrix(x: TimeSeries, cfg: StftConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (frame_times, bin_freqs, values[frame, bin]) as plain arrays."""
    n = cfg.window_length_samples
    if len(x) < n:
        raise InputError(
            f"insufficient samples: {len(x)} samples, window needs {n}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x.samples, n)[:: cfg.hop_samples]
    values = np.fft.rfft(frames * cfg.window(), n=cfg.n_fft, axis=1)
    starts = np.arange(frames.shape[0]) * cfg.hop_samples
    times = x.start_time_s + (starts + n / 2) / x.sample_rate_hz
    return times, cfg.bin_freqs_hz(x.sample_rate_hz), values


def stft(x: TimeSeries, cfg: StftConfig) -> list[SpectrumFrame]:
    times, freqs, values = stft_matrix(x, cfg)
    return [
        SpectrumFrame(row, freqs, float(t), cfg.window_kind) for t, row in zip(times, values)
    ]


def load_timeseries_csv(
    path: str | PathLike,
    column_map: Mapping[str, str] | Sequence[str],
    time_column: str = "t",
    jitter_tol: float = 1e-6,
) -> dict[str, TimeSeries]:
    """Read uniformly sampled columns from a CSV file.

    ``column_map`` maps result names to CSV column names; a plain sequence of
    column names maps each name to itself.
    """
    if not isinstance(column_map, Mapping):
        column_map = {name: name for name in column_map}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        rows = [r for r in reader if r]

    wanted = [time_column, *column_map.values()]
    missing = [c for c in wanted if c not in header]
    if missing:
        raise InputError(f"{path}: missing column(s) {', '.join(missing)}")
    if len(rows) < 2:
        raise InputError(f"{path}: need at least two rows to infer the sample rate")

    idx = [header.index(c) for c in wanted]
    try:
        data = np.array([[float(r[i]) for i in idx] for r in rows])
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: unparseable row ({exc})") from None

    t = data[:, 0]
    dt = np.diff(t)
    step = float(np.median(dt))
    if not step > 0:
        raise InputError(f"{path}: time column is not increasing")
    if np.max(np.abs(dt - step)) > jitter_tol * step:
        raise InputError(f"{path}: non-uniform time grid (relative jitter above {jitter_tol:g})")

    # grid is uniform, so the full span gives the step without rounding noise
    step = float(t[-1] - t[0]) / (t.size - 1)
    return {
        name: TimeSeries(data[:, j + 1], 1.0 / step, float(t[0]))
        for j, name in enumerate(column_map)
    }


def excitation_check(
    u_frames: Sequence[SpectrumFrame], band: FrequencyBand, threshold: float
) -> list[bool]:
    """Flag frames whose in-band input power is a large enough share of the total.

    A frame passes when mean |U|^2 inside the band is at least ``threshold``
    times mean |U|^2 over all bins above 0 Hz, and the in-band power is nonzero.
    The DC bin is left out so a constant operating torque does not mask the band.
    """
    flags = []
    for frame in u_frames:
        inside = band.mask(frame.bin_freqs_hz)
        if not inside.any():
            raise InputError(
                f"empty band: no bins in [{band.f_min_hz}, {band.f_max_hz}] Hz"
            )
        power = np.abs(frame.bin_values) ** 2
        inside &= frame.bin_freqs_hz > 0
        in_band = float(power[inside].mean()) if inside.any() else 0.0
        overall = float(power[frame.bin_freqs_hz > 0].mean())
        flags.append(in_band > 0.0 and in_band >= threshold * overall)
    return flags
