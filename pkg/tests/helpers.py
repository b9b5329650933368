"""Synthetic SISO systems simulated with scipy, independent of the driveline code."""

import math

import numpy as np
from scipy.signal import lsim

from resonance_rls.driveline import excitation_profile
from resonance_rls.modeling import ModeParameters
from resonance_rls.signals import TimeSeries


def siso_response(modes, fs, duration, f_lo, f_hi, period, amplitude=1.0):
    """Drive sum_i c_i / (s^2 + 2 a_i s + b_i) with a periodic chirp.

    ``modes`` holds (fr_hz, zeta, c) triples.  Returns input and output series.
    """
    t = np.arange(int(round(duration * fs)) + 1) / fs
    prof = excitation_profile(f_lo, f_hi, rated_torque=amplitude, chirp_fraction=1.0, ramp_time_s=1e-9,
                              load_delay_s=1e12, sweep_period_s=period)
    u = prof(t)[0] - amplitude
    num = np.zeros(1)
    den = np.ones(1)
    for fr, zeta, c in modes:
        p = ModeParameters.from_frequency(fr, zeta)
        d = np.array([1.0, 2 * p.alpha, p.beta])
        num = np.polyadd(np.polymul(num, d), c * den)
        den = np.polymul(den, d)
    _, y, _ = lsim((np.trim_zeros(num, "f"), den), u, t)
    return TimeSeries(u, fs), TimeSeries(y, fs)
