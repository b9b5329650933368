"""Per-mode estimation instances driven by a stream of STFT frame pairs.

Every instance owns its band, its RLS state and its report series; nothing is
shared between instances, so they can run in any order or in parallel and
produce identical results.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from os import PathLike
from typing import Sequence

import numpy as np

from .errors import EstimationError, InputError
from .modeling import ModeParameters, ModeReport, mode_report
from .regression import ParameterVector, Variant, band_points
from .rls import RlsState, inflate, residual_power, rls_init, rls_run_frame
from .signals import (
    FrequencyBand,
    SpectrumFrame,
    StftConfig,
    TimeSeries,
    excitation_check,
    stft,
)

__all__ = [
    "FrequencyBand",
    "RlsConfig",
    "ModeInstanceConfig",
    "FrameDiagnostic",
    "EstimationRun",
    "run_estimation",
    "run_on_frames",
    "emit_run",
    "write_spectrogram",
]

RUN_FIELDS = ("instance", "time_s", "fr_hz", "zeta", "valid", "alpha", "beta", "residual_norm")


@dataclass(frozen=True)
class RlsConfig:
    """RLS settings for one instance.

    ``r=None`` picks R = r*I from the residual power of the first excited
    frame.  Between frames the diagonal of P grows by q/n_frames_memory of
    its current value (``inflation="relative"``) or by q*diag(P0)/n_frames_memory
    (``inflation="prior"``).  With ``carry_covariance=False`` P is reset to P0
    at every frame instead.
    """

    x0: tuple[float, ...] | None = None
    p0_scale: float = 1e6
    r: float | None = None
    q: float = 0.01
    n_frames_memory: int = 10
    carry_covariance: bool = True
    inflation: str = "relative"

    def __post_init__(self):
        if self.inflation not in ("relative", "prior"):
            raise InputError(f"unknown inflation mode {self.inflation!r}")
        if not self.p0_scale > 0 or self.q < 0 or self.n_frames_memory < 1:
            raise InputError("need p0_scale > 0, q >= 0 and n_frames_memory >= 1")

    def inflation_for(self, P: np.ndarray) -> np.ndarray:
        base = np.diag(P) if self.inflation == "relative" else np.full(P.shape[0], self.p0_scale)
        return np.diag(self.q * base / self.n_frames_memory)


@dataclass(frozen=True)
class ModeInstanceConfig:
    band: FrequencyBand
    variant: Variant = Variant.SISO
    initial_guess: tuple[float, float] | None = None
    rls: RlsConfig = field(default_factory=RlsConfig)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.initial_guess is not None:
            fr, zeta = self.initial_guess
            if not self.band.f_min_hz <= fr <= self.band.f_max_hz:
                raise InputError(f"initial guess {fr} Hz lies outside band")
            if not 0 <= zeta < 1:
                raise InputError("initial zeta must be in [0, 1)")

    @classmethod
    def around(cls, f_guess_hz: float, variant=Variant.SISO, zeta_guess: float = 0.05, rel: float = 0.2, **kw):
        """Instance whose band spans +/- ``rel`` around the frequency guess."""
        return cls(FrequencyBand.around(f_guess_hz, rel), variant, (f_guess_hz, zeta_guess), **kw)

    def x0(self) -> np.ndarray:
        if self.rls.x0 is not None:
            return np.asarray(self.rls.x0, dtype=float)
        # no guess: band centre, light damping
        fr, zeta = self.initial_guess or (0.5 * (self.band.f_min_hz + self.band.f_max_hz), 0.05)
        return ParameterVector.from_mode(ModeParameters.from_frequency(fr, zeta), self.variant).entries


@dataclass(frozen=True)
class FrameDiagnostic:
    frame_time_s: float
    excited: bool
    residual_norm: float
    n_points: int


@dataclass
class EstimationRun:
    names: list[str]
    reports: dict[str, list[ModeReport]]
    diagnostics: dict[str, list[FrameDiagnostic]]
    states: dict[str, RlsState]
    warnings: list[str] = field(default_factory=list)

    def final(self, name: str) -> ModeReport | None:
        reps = self.reports[name]
        return reps[-1] if reps else None

    def records(self):
        for name in self.names:
            for rep, diag in zip(self.reports[name], self.diagnostics[name]):
                yield {
                    "instance": name,
                    "time_s": rep.frame_time_s,
                    "fr_hz": rep.fr_hz,
                    "zeta": rep.zeta,
                    "valid": rep.valid,
                    "alpha": rep.alpha,
                    "beta": rep.beta,
                    "residual_norm": diag.residual_norm,
                }


def _frame_residual(x, pts) -> float:
    return math.sqrt(sum(float(np.sum(pt.residual(x) ** 2)) for pt in pts) / len(pts))


def _run_instance(
    inst: ModeInstanceConfig,
    u_frames: Sequence[SpectrumFrame],
    y_frames: Sequence[SpectrumFrame],
    excitation_threshold: float,
):
    cfg = inst.rls
    p = inst.variant.n_params
    x0 = inst.x0()
    P0 = cfg.p0_scale * np.eye(p)
    flags = excitation_check(u_frames, inst.band, excitation_threshold)

    state: RlsState | None = None
    reports, diags = [], []
    for u, y, excited in zip(u_frames, y_frames, flags):
        pts = band_points(u, y, inst.band, inst.variant)
        if excited:
            if state is None:
                r = cfg.r if cfg.r is not None else residual_power(x0, pts)
                if not r > 0:
                    r = 1e-12
                state = rls_init(p, x0, cfg.p0_scale, r * np.eye(2))
            elif cfg.carry_covariance:
                state = inflate(state, cfg.inflation_for(state.P))
            else:
                state = RlsState(state.x_hat, P0, state.R, state.n_updates)
            state = rls_run_frame(state, pts)
        x = state.x_hat if state is not None else x0
        rep = mode_report(ParameterVector(x, inst.variant).mode, u.frame_time_s)
        if state is None:
            rep = ModeReport(rep.fr_hz, rep.zeta, False, rep.frame_time_s, rep.alpha, rep.beta)
        reports.append(rep)
        diags.append(FrameDiagnostic(u.frame_time_s, excited, _frame_residual(x, pts), len(pts)))
    return reports, diags, state


def _instance_names(instances) -> list[str]:
    names = [inst.name or f"mode{i}" for i, inst in enumerate(instances)]
    if len(set(names)) != len(names):
        raise InputError("instance names must be unique")
    return names


def overlap_warnings(instances, names) -> list[str]:
    out = []
    for i in range(len(instances)):
        for j in range(i + 1, len(instances)):
            if instances[i].band.overlaps(instances[j].band):
                out.append(
                    f"bands of {names[i]} and {names[j]} overlap; "
                    "instances assume well-separated modes"
                )
    return out


def run_on_frames(
    u_frames: Sequence[SpectrumFrame],
    y_frames: Sequence[SpectrumFrame],
    instances: Sequence[ModeInstanceConfig],
    excitation_threshold: float = 1e-2,
    workers: int | None = None,
) -> EstimationRun:
    if len(u_frames) != len(y_frames):
        raise InputError("input and output frame counts differ")
    if not instances:
        raise InputError("at least one mode instance is required")
    names = _instance_names(instances)
    notes = overlap_warnings(instances, names)
    for msg in notes:
        warnings.warn(msg, stacklevel=2)

    def job(item):
        name, inst = item
        try:
            return _run_instance(inst, u_frames, y_frames, excitation_threshold)
        except EstimationError as exc:
            raise EstimationError(f"instance {name}: {exc}") from exc

    if workers and workers > 1 and len(instances) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, zip(names, instances)))
    else:
        results = [job(item) for item in zip(names, instances)]

    return EstimationRun(
        names=names,
        reports={n: r[0] for n, r in zip(names, results)},
        diagnostics={n: r[1] for n, r in zip(names, results)},
        states={n: r[2] for n, r in zip(names, results)},
        warnings=notes,
    )


def check_signals(u: TimeSeries, y: TimeSeries, instances: Sequence[ModeInstanceConfig]):
    if u.sample_rate_hz != y.sample_rate_hz or len(u) != len(y):
        raise InputError("input and output signals must share sample rate and length")
    for inst in instances:
        if inst.band.f_max_hz >= u.nyquist_hz:
            raise InputError(
                f"band exceeds Nyquist: [{inst.band.f_min_hz}, {inst.band.f_max_hz}] Hz "
                f"vs {u.nyquist_hz} Hz"
            )


def run_estimation(
    u: TimeSeries,
    y: TimeSeries,
    stft_cfg: StftConfig,
    instances: Sequence[ModeInstanceConfig],
    excitation_threshold: float = 1e-2,
    workers: int | None = None,
) -> EstimationRun:
    """Estimate every configured mode from input ``u`` and output ``y``.

    For the driveline variant ``u`` is the electrical torque and ``y`` the
    motor speed.  One report per STFT frame and instance.
    """
    check_signals(u, y, instances)
    return run_on_frames(stft(u, stft_cfg), stft(y, stft_cfg), instances, excitation_threshold, workers)


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return f"{v + 0.0:.12g}"


def emit_run(run: EstimationRun, path: str | PathLike, fmt: str = "csv") -> None:
    if fmt not in ("csv", "jsonl"):
        raise InputError(f"unknown output format {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                writer = csv.writer(fh)
                writer.writerow(RUN_FIELDS)
                for rec in run.records():
                    writer.writerow([format_value(rec[k]) for k in RUN_FIELDS])
            else:
                for rec in run.records():
                    fh.write(json.dumps(rec) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write run output to {path}: {exc.strerror or exc}") from exc


def write_spectrogram(
    path: str | PathLike,
    u_frames: Sequence[SpectrumFrame],
    y_frames: Sequence[SpectrumFrame],
    run: EstimationRun | None = None,
    f_max_hz: float | None = None,
) -> None:
    """Write |Y|/|U| per frame (rows) and bin (columns) with fr estimates appended.

    Cells where |U| is negligible are left empty.
    """
    if not u_frames:
        raise InputError("no frames to export")
    freqs = u_frames[0].bin_freqs_hz
    keep = np.ones(freqs.size, bool) if f_max_hz is None else freqs <= f_max_hz
    u_max = max(float(np.abs(f.bin_values).max()) for f in u_frames)
    eps = 1e-12 * u_max
    names = run.names if run is not None else []
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time_s", *(f"{f:.12g}" for f in freqs[keep]), *(f"fr_{n}" for n in names)])
            for k, (u, y) in enumerate(zip(u_frames, y_frames)):
                U = np.abs(u.bin_values[keep])
                Y = np.abs(y.bin_values[keep])
                cells = [format_value(yv / uv) if uv > eps else "" for yv, uv in zip(Y, U)]
                frs = [format_value(run.reports[n][k].fr_hz) for n in names]
                writer.writerow([format_value(u.frame_time_s), *cells, *frs])
    except OSError as exc:
        raise OSError(f"cannot write spectrogram to {path}: {exc.strerror or exc}") from exc
