import math

import numpy as np
import pytest
from scipy.linalg import eigh
from scipy.signal import csd, welch

from resonance_rls.driveline import (
    DrivelineConfig,
    excitation_profile,
    ground_truth_modes,
    simulate,
    tune_for_target,
    two_mass,
    zero_profile,
)
from resonance_rls.errors import InputError


def undamped_oracle_hz(cfg):
    M, _, K = cfg.matrices()
    w2 = eigh(K, M, eigvals_only=True)
    return sorted(math.sqrt(v) / (2 * math.pi) for v in w2 if v > 1e-9 * w2.max())


def test_config_validation():
    with pytest.raises(InputError):
        DrivelineConfig((1.0,), ())
    with pytest.raises(InputError):
        DrivelineConfig((1.0, 1.0), (1.0, 2.0))
    with pytest.raises(InputError):
        DrivelineConfig((1.0, -1.0), (1.0,))
    cfg = DrivelineConfig((1, 2, 3), (10, 20))
    assert cfg.shaft_dampings == (0.0, 0.0) and cfg.viscous_dampings == (0.0, 0.0, 0.0)


def test_two_mass_undamped_mode():
    modes = ground_truth_modes(two_mass(100.0))
    closed_form = math.sqrt(100.0 * 2) / (2 * math.pi)
    assert len(modes) == 1
    fr, zeta = modes[0]
    assert fr == pytest.approx(2.25079079039277, abs=1e-9)
    assert fr == pytest.approx(closed_form, rel=1e-12)
    assert fr == pytest.approx(undamped_oracle_hz(two_mass(100.0))[0], rel=1e-12)
    assert zeta == 0.0


@pytest.mark.parametrize("c", [0.05, 0.5, 1.0])
def test_two_mass_damping_closed_form(c):
    k = 100.0
    (fr, zeta), = ground_truth_modes(two_mass(k, c))
    expected = (c / 2) * math.sqrt(2 / k)
    assert expected <= 0.1
    assert zeta == pytest.approx(expected, abs=1e-3)


def test_three_mass_chain():
    cfg = DrivelineConfig((1.0, 0.5, 2.0), (300.0, 800.0), (0.1, 0.2), (0.0, 0.0, 0.05))
    modes = ground_truth_modes(cfg)
    assert len(modes) == 2
    assert modes == sorted(modes)
    undamped = undamped_oracle_hz(DrivelineConfig(cfg.inertias, cfg.stiffnesses))
    assert [m[0] for m in modes] == pytest.approx(undamped, rel=1e-3)


def test_tune_closed_form():
    cfg = tune_for_target(9.8, 0.0)
    assert cfg.inertias == (1.0, 1.0)
    # mpmath: (2 pi 9.8)^2 / 2
    assert cfg.stiffnesses[0] == pytest.approx(1895.75361336124, rel=1e-9)
    assert tune_for_target(2.25079079039277, 0.0).stiffnesses[0] == pytest.approx(100.0, rel=1e-9)


@pytest.mark.parametrize("f,zeta", [(9.8, 0.02), (1.5, 0.3), (40.0, 0.45)])
def test_tune_hits_target(f, zeta):
    (fr, z), = ground_truth_modes(tune_for_target(f, zeta))
    assert fr == pytest.approx(f, rel=1e-3)
    assert z == pytest.approx(zeta, rel=1e-3)


def test_tune_rejects_bad_targets():
    with pytest.raises(InputError):
        tune_for_target(-1.0, 0.1)
    with pytest.raises(InputError):
        tune_for_target(5.0, 0.6)


def test_zero_input_zero_output():
    out = simulate(two_mass(100.0, 0.5), zero_profile, 200.0, 2.0)
    assert not np.any(out.speed.samples)
    assert not np.any(out.electrical_torque.samples)
    assert len(out.speed) == 401


def test_energy_conservation():
    cfg = two_mass(100.0)
    x0 = [0.1, -0.1, 0.0, 0.0]
    out = simulate(cfg, zero_profile, 100.0, 20.0, initial_state=x0)
    energy = cfg.energy(out.states)
    assert np.max(np.abs(energy / energy[0] - 1)) <= 1e-6
    # the mode actually oscillates: speed of inertia 1 changes sign
    assert out.speed.samples.min() < 0 < out.speed.samples.max()


def test_linearity_in_electrical_torque():
    cfg = tune_for_target(9.8, 0.02)
    prof = excitation_profile(4, 18, load_delay_s=1e9)

    def doubled(t):
        e, _ = prof(t)
        return 2 * e, np.zeros_like(e)

    def single(t):
        e, _ = prof(t)
        return e, np.zeros_like(e)

    a = simulate(cfg, single, 500.0, 5.0).speed.samples
    b = simulate(cfg, doubled, 500.0, 5.0).speed.samples
    assert np.max(np.abs(b - 2 * a)) <= 1e-9 * np.max(np.abs(2 * a))


def test_internal_rate_convergence():
    cfg = tune_for_target(9.8, 0.02)
    prof = excitation_profile(4, 18)
    a = simulate(cfg, prof, 1000.0, 5.0, oversample=10).speed.samples
    b = simulate(cfg, prof, 1000.0, 5.0, oversample=20).speed.samples
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(b))


def test_unstable_step_rejected():
    with pytest.raises(InputError, match="increase oversample"):
        simulate(two_mass(1e8), zero_profile, 100.0, 1.0, oversample=1)


def test_output_layout(driveline_98):
    _, out = driveline_98
    n = len(out.speed)
    assert n == 60001
    for ts in (out.electrical_torque, out.load_torque):
        assert len(ts) == n and ts.sample_rate_hz == out.speed.sample_rate_hz
    assert out.ground_truth_modes[0][0] == pytest.approx(9.8, rel=1e-9)


def test_empirical_transfer_peaks_at_modes():
    cfg = DrivelineConfig((1.0, 0.5, 2.0), (300.0, 800.0), (0.02, 0.03), (0.0, 0.0, 0.0))
    modes = ground_truth_modes(cfg)
    fs, nseg = 400.0, 8000
    prof = excitation_profile(0.5, 15.0, ramp_time_s=1.0, load_delay_s=0.0, sweep_period_s=nseg / fs)
    out = simulate(cfg, prof, fs, 200.0)
    u, y = out.electrical_torque.samples, out.speed.samples
    f, Puu = welch(u, fs, nperseg=nseg, window="boxcar", noverlap=0, detrend="constant")
    _, Puy = csd(u, y, fs, nperseg=nseg, window="boxcar", noverlap=0, detrend="constant")
    gain = np.abs(Puy / Puu)
    df = f[1] - f[0]
    for fr, _ in modes:
        near = (f > 0.8 * fr) & (f < 1.2 * fr)
        peak = f[near][np.argmax(gain[near])]
        assert abs(peak - fr) <= df + 1e-12
