"""YAML run configuration shared by the CLI subcommands.

Example::

    simulation:
      sample_rate_hz: 1000
      duration_s: 60
      tune: {f_target_hz: 9.8, zeta: 0.02}      # or a `driveline:` block
      excitation: {chirp_fraction: 0.05}        # optional overrides
    columns: {time: t, input: tau_e, output: speed}
    stft: {window_length_samples: 10000, hop_samples: 5000, window_kind: hann}
    excitation_threshold: 0.01
    instances:
      - name: drive
        variant: driveline
        band: [8, 12]                           # or guess_hz: 10 for +/-20 %
        initial_guess: [10.0, 0.05]
        rls: {p0_scale: 1.0e6, q: 0.01}
    output: {path: reports.csv, format: csv}

All numbers are SI; bands and frequencies in Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from typing import Any

import yaml

from .driveline import DrivelineConfig, TorqueProfile, excitation_profile, tune_for_target
from .errors import InputError
from .estimator import ModeInstanceConfig, RlsConfig
from .regression import Variant
from .signals import FrequencyBand, StftConfig, default_stft_config


@dataclass
class SimulationSpec:
    sample_rate_hz: float
    duration_s: float
    driveline: DrivelineConfig
    excitation: dict[str, Any]
    oversample: int = 10

    def profile(self) -> TorqueProfile:
        return excitation_profile(**self.excitation)


@dataclass
class RunConfig:
    instances: list[ModeInstanceConfig] = field(default_factory=list)
    stft: StftConfig | None = None
    columns: dict[str, str] = field(
        default_factory=lambda: {"time": "t", "input": "tau_e", "output": "speed"}
    )
    excitation_threshold: float = 1e-2
    workers: int | None = None
    output_path: str | None = None
    output_format: str = "csv"
    simulation: SimulationSpec | None = None
    spectrogram_f_max_hz: float | None = None

    def stft_for(self, sample_rate_hz: float) -> StftConfig:
        if self.stft is not None:
            return self.stft
        if not self.instances:
            raise InputError("no stft section and no instances to derive one from")
        return default_stft_config(sample_rate_hz, [i.band for i in self.instances])

    def check_nyquist(self, sample_rate_hz: float):
        for inst in self.instances:
            if inst.band.f_max_hz >= 0.5 * sample_rate_hz:
                raise InputError(
                    f"band exceeds Nyquist: {inst.name or 'instance'} reaches "
                    f"{inst.band.f_max_hz} Hz at {sample_rate_hz} Hz sampling"
                )


def _section(raw: dict, key: str, kind=dict, default=None):
    value = raw.get(key, default)
    if value is not None and not isinstance(value, kind):
        raise InputError(f"config key {key!r} must be a {kind.__name__}")
    return value


def _parse_instance(raw: dict, i: int) -> ModeInstanceConfig:
    if not isinstance(raw, dict):
        raise InputError(f"instance {i} must be a mapping")
    variant = Variant(raw.get("variant", "siso"))
    guess = raw.get("initial_guess")
    guess = (float(guess[0]), float(guess[1])) if guess is not None else None
    rls_raw = dict(_section(raw, "rls", default={}))
    if rls_raw.get("x0") is not None:
        rls_raw["x0"] = tuple(float(v) for v in rls_raw["x0"])
    for key in ("p0_scale", "q"):
        if key in rls_raw:
            rls_raw[key] = float(rls_raw[key])
    if rls_raw.get("r") is not None:
        rls_raw["r"] = float(rls_raw["r"])
    try:
        rls = RlsConfig(**rls_raw)
    except TypeError as exc:
        raise InputError(f"instance {i}: bad rls settings ({exc})") from None
    name = str(raw.get("name", f"mode{i}"))
    if "band" in raw:
        lo, hi = raw["band"]
        return ModeInstanceConfig(FrequencyBand(float(lo), float(hi)), variant, guess, rls, name)
    if "guess_hz" in raw:
        f = float(raw["guess_hz"])
        band = FrequencyBand.around(f, float(raw.get("band_rel", 0.2)))
        return ModeInstanceConfig(band, variant, guess or (f, 0.05), rls, name)
    raise InputError(f"instance {i} needs `band` or `guess_hz`")


def _parse_simulation(raw: dict, instances, stft: StftConfig | None) -> SimulationSpec:
    fs = float(raw.get("sample_rate_hz", 0))
    duration = float(raw.get("duration_s", 0))
    if not fs > 0:
        raise InputError("simulation.sample_rate_hz must be positive")
    if not duration > 0:
        raise InputError("simulation.duration_s must be positive")

    if "driveline" in raw:
        d = raw["driveline"]
        driveline = DrivelineConfig(
            tuple(d["inertias"]),
            tuple(d["stiffnesses"]),
            tuple(d.get("shaft_dampings", ())),
            tuple(d.get("viscous_dampings", ())),
        )
        target = None
    elif "tune" in raw:
        t = raw["tune"]
        target = float(t["f_target_hz"])
        driveline = tune_for_target(target, float(t.get("zeta", 0.0)))
    else:
        raise InputError("simulation needs a `driveline` or `tune` block")

    # chirp covers 0.5x..1.5x the estimation bands, repeating once per STFT window
    exc = dict(_section(raw, "excitation", default={}))
    if instances:
        lo = min(i.band.f_min_hz for i in instances)
        hi = max(i.band.f_max_hz for i in instances)
    elif target is not None:
        lo, hi = 0.8 * target, 1.2 * target
    else:
        lo, hi = 1.0, 0.2 * fs
    exc.setdefault("f_lo_hz", 0.5 * lo)
    exc.setdefault("f_hi_hz", min(1.5 * hi, 0.45 * fs))
    if "sweep_period_s" not in exc:
        if stft is None and instances:
            stft = default_stft_config(fs, [i.band for i in instances])
        exc["sweep_period_s"] = stft.window_length_samples / fs if stft else 10.0
    exc = {k: float(v) for k, v in exc.items()}
    return SimulationSpec(fs, duration, driveline, exc, int(raw.get("oversample", 10)))


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise InputError("config must be a mapping at top level")
    try:
        instances = [_parse_instance(r, i) for i, r in enumerate(raw.get("instances") or [])]
        stft_raw = _section(raw, "stft")
        stft = StftConfig(**stft_raw) if stft_raw else None
        cfg = RunConfig(instances=instances, stft=stft)
        if "columns" in raw:
            cfg.columns.update({k: str(v) for k, v in _section(raw, "columns").items()})
        cfg.excitation_threshold = float(raw.get("excitation_threshold", cfg.excitation_threshold))
        if raw.get("workers") is not None:
            cfg.workers = int(raw["workers"])
        out = _section(raw, "output", default={})
        cfg.output_path = out.get("path")
        cfg.output_format = out.get("format", "csv")
        if raw.get("spectrogram_f_max_hz") is not None:
            cfg.spectrogram_f_max_hz = float(raw["spectrogram_f_max_hz"])
        if raw.get("simulation") is not None:
            cfg.simulation = _parse_simulation(_section(raw, "simulation"), instances, stft)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid config: {exc!r}") from None
    return cfg


def load_config(path: str | PathLike) -> RunConfig:
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise InputError(f"{path}: not valid YAML ({exc})") from None
    return parse_config(raw or {})
