"""Monte-Carlo sweep of estimate error against measurement SNR on the driveline speed.

    python scripts/noise_montecarlo.py --snr 60 40 30 20 --runs 50
"""

import argparse
import math

import numpy as np

from resonance_rls import (
    FrequencyBand,
    ModeInstanceConfig,
    StftConfig,
    TimeSeries,
    excitation_profile,
    run_estimation,
    simulate,
    tune_for_target,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr", type=float, nargs="+", default=[60.0, 40.0, 30.0, 20.0])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--total-power", action="store_true", help="measure SNR on total rather than mean-removed speed power")
    args = ap.parse_args()

    fr, zeta, fs = 9.8, 0.02, 1000.0
    out = simulate(tune_for_target(fr, zeta), excitation_profile(4.0, 18.0, sweep_period_s=10.0), fs, 60.0)
    speed = out.speed.samples
    power = np.mean(speed**2) if args.total_power else speed.var()
    stft_cfg = StftConfig(10000, 5000, "hann")
    inst = ModeInstanceConfig(FrequencyBand(8.0, 12.0), "driveline", (10.0, 0.05))
    rng = np.random.default_rng(args.seed)

    print("snr_db\tmedian_fr_err_pct\tp90_fr_err_pct\tmedian_zeta_err_pct")
    for snr in args.snr:
        sigma = math.sqrt(power / 10 ** (snr / 10))
        fr_err, z_err = [], []
        for _ in range(args.runs):
            y = TimeSeries(speed + rng.normal(0.0, sigma, speed.size), fs)
            rep = run_estimation(out.electrical_torque, y, stft_cfg, [inst]).final("mode0")
            fr_err.append(abs(rep.fr_hz / fr - 1))
            z_err.append(abs(rep.zeta / zeta - 1))
        print(f"{snr:g}\t{100 * np.median(fr_err):.3f}\t{100 * np.percentile(fr_err, 90):.3f}\t{100 * np.median(z_err):.2f}")


if __name__ == "__main__":
    main()
