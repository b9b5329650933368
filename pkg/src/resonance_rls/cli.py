"""Command line entry point: ``resonance-rls {simulate,estimate,spectrogram}``.

Exit codes: 0 success, 2 config or parse error, 3 I/O error, 4 estimation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .driveline import SimOutput, simulate
from .errors import EstimationError, InputError
from .estimator import EstimationRun, emit_run, format_value, run_on_frames, write_spectrogram
from .signals import load_timeseries_csv, stft

log = logging.getLogger("resonance_rls")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_ESTIMATION = 0, 2, 3, 4
SIM_COLUMNS = ("t", "speed", "tau_e", "tau_l")


def write_sim_csv(out: SimOutput, path) -> Path:
    """Write the simulation CSV plus a ``<path>.modes.json`` ground-truth sidecar."""
    path = Path(path)
    t = out.speed.times
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SIM_COLUMNS)
        for row in zip(t, out.speed.samples, out.electrical_torque.samples, out.load_torque.samples):
            writer.writerow([format_value(float(v)) for v in row])
    sidecar = path.with_name(path.name + ".modes.json")
    modes = [{"fr_hz": fr, "zeta": z} for fr, z in out.ground_truth_modes]
    sidecar.write_text(json.dumps({"modes": modes, "sample_rate_hz": out.speed.sample_rate_hz}, indent=2) + "\n")
    return sidecar


def cmd_simulate(cfg: RunConfig, output: str | None) -> int:
    sim = cfg.simulation
    if sim is None:
        raise InputError("config has no `simulation` section")
    path = output or cfg.output_path
    if not path:
        raise InputError("no output path given (use --output)")
    log.info("simulating %s for %.3g s at %.6g Hz", sim.driveline, sim.duration_s, sim.sample_rate_hz)
    out = simulate(sim.driveline, sim.profile(), sim.sample_rate_hz, sim.duration_s, sim.oversample)
    sidecar = write_sim_csv(out, path)
    log.info("wrote %s and %s", path, sidecar)
    return EXIT_OK


def _load_frames(cfg: RunConfig, input_csv):
    if not cfg.instances:
        raise InputError("config declares no instances")
    cols = cfg.columns
    series = load_timeseries_csv(
        input_csv, {"u": cols["input"], "y": cols["output"]}, time_column=cols["time"]
    )
    u, y = series["u"], series["y"]
    cfg.check_nyquist(u.sample_rate_hz)
    stft_cfg = cfg.stft_for(u.sample_rate_hz)
    log.info("stft %s on %d samples", stft_cfg, len(u))
    return stft(u, stft_cfg), stft(y, stft_cfg)


def _estimate(cfg: RunConfig, u_frames, y_frames) -> EstimationRun:
    run = run_on_frames(u_frames, y_frames, cfg.instances, cfg.excitation_threshold, cfg.workers)
    for msg in run.warnings:
        log.warning(msg)
    return run


def cmd_estimate(cfg: RunConfig, input_csv, output: str | None, fmt: str | None) -> int:
    path = output or cfg.output_path
    if not path:
        raise InputError("no output path given (use --output)")
    u_frames, y_frames = _load_frames(cfg, input_csv)
    run = _estimate(cfg, u_frames, y_frames)
    emit_run(run, path, fmt or cfg.output_format)
    for name in run.names:
        rep = run.final(name)
        print(f"{name}\t{format_value(rep.fr_hz)}\t{format_value(rep.zeta)}\t{format_value(rep.valid)}")
    return EXIT_OK


def cmd_spectrogram(cfg: RunConfig, input_csv, output: str | None) -> int:
    if not output:
        raise InputError("no output path given (use --output)")
    u_frames, y_frames = _load_frames(cfg, input_csv)
    run = _estimate(cfg, u_frames, y_frames)
    write_spectrogram(output, u_frames, y_frames, run, cfg.spectrogram_f_max_hz)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resonance-rls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("simulate", "simulate a driveline and write its signals to CSV"),
        ("estimate", "estimate resonant modes from a CSV of input/output signals"),
        ("spectrogram", "export the |Y/U| spectrogram with fr estimates"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="YAML run configuration")
        if name != "simulate":
            p.add_argument("--input", required=True, help="input CSV")
        p.add_argument("--output", help="output file (overrides config)")
        if name == "estimate":
            p.add_argument("--format", choices=("jsonl", "csv"), help="report format")
        p.add_argument("--verbose", "-v", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.output)
        if args.command == "estimate":
            return cmd_estimate(cfg, args.input, args.output, args.format)
        return cmd_spectrogram(cfg, args.input, args.output)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
