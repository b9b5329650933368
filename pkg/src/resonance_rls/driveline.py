"""Lumped inertia-spring-damper driveline simulator.

Inertias are numbered from the motor (index 0, electrical torque applied)
to the load (index N-1, load torque applied).  The equations of motion are
M theta'' + C theta' + K theta = tau, integrated with fixed-step RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InputError
from .signals import TimeSeries

# (t array) -> (tau_e array, tau_l array)
TorqueProfile = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class DrivelineConfig:
    inertias: tuple[float, ...]
    stiffnesses: tuple[float, ...]
    shaft_dampings: tuple[float, ...] = ()
    viscous_dampings: tuple[float, ...] = ()

    def __post_init__(self):
        n = len(self.inertias)
        if n < 2:
            raise InputError("driveline needs at least two inertias")
        shaft = self.shaft_dampings or (0.0,) * (n - 1)
        viscous = self.viscous_dampings or (0.0,) * n
        for name, vals, size in (
            ("stiffnesses", self.stiffnesses, n - 1),
            ("shaft_dampings", shaft, n - 1),
            ("viscous_dampings", viscous, n),
        ):
            if len(vals) != size:
                raise InputError(f"{name} needs {size} entries, got {len(vals)}")
        if min(self.inertias) <= 0 or min(self.stiffnesses) <= 0:
            raise InputError("inertias and stiffnesses must be positive")
        if min(shaft) < 0 or min(viscous) < 0:
            raise InputError("dampings must be non-negative")
        object.__setattr__(self, "inertias", tuple(float(v) for v in self.inertias))
        object.__setattr__(self, "stiffnesses", tuple(float(v) for v in self.stiffnesses))
        object.__setattr__(self, "shaft_dampings", tuple(float(v) for v in shaft))
        object.__setattr__(self, "viscous_dampings", tuple(float(v) for v in viscous))

    @property
    def n(self) -> int:
        return len(self.inertias)

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mass, damping and stiffness matrices (M, C, K)."""
        n = self.n
        M = np.diag(self.inertias)
        K = np.zeros((n, n))
        C = np.diag(self.viscous_dampings)
        for i, (k, c) in enumerate(zip(self.stiffnesses, self.shaft_dampings)):
            for mat, v in ((K, k), (C, c)):
                mat[i, i] += v
                mat[i + 1, i + 1] += v
                mat[i, i + 1] -= v
                mat[i + 1, i] -= v
        return M, C, K

    def state_space(self) -> tuple[np.ndarray, np.ndarray]:
        """First-order system x' = A x + B [tau_e, tau_l] with x = (theta, theta')."""
        n = self.n
        M, C, K = self.matrices()
        Minv = np.diag(1.0 / np.asarray(self.inertias))
        A = np.block([[np.zeros((n, n)), np.eye(n)], [-Minv @ K, -Minv @ C]])
        B = np.zeros((2 * n, 2))
        B[n, 0] = 1.0 / self.inertias[0]
        B[2 * n - 1, 1] = 1.0 / self.inertias[-1]
        return A, B

    def energy(self, states: np.ndarray) -> np.ndarray:
        """Kinetic plus spring energy for states of shape (..., 2N)."""
        M, _, K = self.matrices()
        theta, speed = states[..., : self.n], states[..., self.n :]
        kinetic = 0.5 * np.einsum("...i,ij,...j->...", speed, M, speed)
        spring = 0.5 * np.einsum("...i,ij,...j->...", theta, K, theta)
        return kinetic + spring


@dataclass(frozen=True)
class SimOutput:
    speed: TimeSeries
    electrical_torque: TimeSeries
    load_torque: TimeSeries
    ground_truth_modes: tuple[tuple[float, float], ...]
    states: np.ndarray = field(repr=False, default=None)


def ground_truth_modes(cfg: DrivelineConfig) -> list[tuple[float, float]]:
    """Flexible modes (fr_hz, zeta) from the eigenvalues of the state matrix."""
    A, _ = cfg.state_space()
    lam = np.linalg.eigvals(A)
    scale = np.abs(lam).max()
    modes = []
    for l in lam:
        if abs(l) < 1e-6 * scale or l.imag <= 1e-9 * scale:
            continue  # rigid-body pair, real (overdamped) roots, or conjugate twin
        zeta = -l.real / abs(l)
        modes.append((float(l.imag / (2 * math.pi)), zeta if abs(zeta) > 1e-12 else 0.0))
    return sorted(modes)


def two_mass(k: float, c: float = 0.0, j1: float = 1.0, j2: float = 1.0) -> DrivelineConfig:
    return DrivelineConfig((j1, j2), (k,), (c,), (0.0, 0.0))


def tune_for_target(
    f_target_hz: float, zeta_target: float, max_iter: int = 20, rtol: float = 1e-9
) -> DrivelineConfig:
    """Two-mass config (J1 = J2 = 1) whose flexible mode is (f_target_hz, zeta_target).

    Starts from the closed form and polishes (k, c) with Newton steps on the
    eigenvalue-derived mode.
    """
    if not f_target_hz > 0 or not 0 <= zeta_target < 0.5:
        raise InputError("need f_target_hz > 0 and 0 <= zeta_target < 0.5")
    m = 2.0  # 1/J1 + 1/J2
    wn = 2 * math.pi * f_target_hz / math.sqrt(1 - zeta_target**2)
    k = wn**2 / m
    c = 2 * zeta_target * math.sqrt(k / m)
    target = np.array([f_target_hz, zeta_target])

    def err(k, c):
        modes = ground_truth_modes(two_mass(k, c))
        if len(modes) != 1:
            raise InputError("target mode is not underdamped")
        return np.array(modes[0]) - target

    for _ in range(max_iter):
        e = err(k, c)
        if abs(e[0]) <= rtol * f_target_hz and abs(e[1]) <= rtol * max(zeta_target, 1e-3):
            return two_mass(k, c)
        hk, hc = 1e-7 * k, 1e-7 * max(c, 1e-6)
        J = np.column_stack([(err(k + hk, c) - e) / hk, (err(k, c + hc) - e) / hc])
        dk, dc = np.linalg.solve(J, -e)
        k, c = k + dk, max(c + dc, 0.0)
    raise InputError(f"could not reach ({f_target_hz} Hz, zeta {zeta_target}) in {max_iter} steps")


def excitation_profile(
    f_lo_hz: float,
    f_hi_hz: float,
    rated_torque: float = 1.0,
    chirp_fraction: float = 0.05,
    ramp_time_s: float = 2.0,
    load_delay_s: float = 1.0,
    sweep_period_s: float = 20.0,
) -> TorqueProfile:
    """Torque ramp to rated value plus a repeating linear chirp.

    The load torque ramps to the same rated value ``load_delay_s`` later, so the
    speed rises during the transient and then settles, with the chirp on top.
    """
    span = f_hi_hz - f_lo_hz

    def profile(t):
        t = np.asarray(t, dtype=float)
        ramp = np.clip(t / ramp_time_s, 0.0, 1.0)
        load_ramp = np.clip((t - load_delay_s) / ramp_time_s, 0.0, 1.0)
        tau = np.mod(t, sweep_period_s)
        phase = 2 * math.pi * (f_lo_hz * tau + 0.5 * span * tau**2 / sweep_period_s)
        tau_e = rated_torque * (ramp + chirp_fraction * np.sin(phase))
        tau_l = -rated_torque * load_ramp
        return tau_e, tau_l

    return profile


def zero_profile(t):
    z = np.zeros_like(np.asarray(t, dtype=float))
    return z, z


def rk4_matrices(A: np.ndarray, B: np.ndarray, h: float):
    """Write one RK4 step of x' = Ax + Bu as x+ = Phi x + G0 u(t) + Gm u(t+h/2) + G1 u(t+h)."""
    n = A.shape[0]
    I = np.eye(n)
    hA = h * A
    Phi = I + hA @ (I + hA @ (I + hA @ (I + hA / 4) / 3) / 2)
    # k1 = A x + B u0, k2 = A(x + h k1/2) + B um, k3 = A(x + h k2/2) + B um, k4 = A(x + h k3) + B u1
    # input part of each stage, tracked as matrices acting on (u0, um, u1)
    k1 = (B, 0 * B, 0 * B)
    k2 = tuple(hA @ a / 2 + b for a, b in zip(k1, (0 * B, B, 0 * B)))
    k3 = tuple(hA @ a / 2 + b for a, b in zip(k2, (0 * B, B, 0 * B)))
    k4 = tuple(hA @ a + b for a, b in zip(k3, (0 * B, 0 * B, B)))
    G0, Gm, G1 = (h / 6 * (a + 2 * b + 2 * c + d) for a, b, c, d in zip(k1, k2, k3, k4))
    return Phi, G0, Gm, G1


def rk4_stable(A: np.ndarray, h: float) -> bool:
    """RK4 amplification |R(h*lam)| <= 1 on every non-rigid eigenvalue of A."""
    lam = np.linalg.eigvals(A)
    lam = lam[np.abs(lam) > 1e-6 * np.abs(lam).max()]
    z = h * lam
    amp = np.abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24)
    return bool(np.all(amp <= 1 + 1e-12))


def simulate(
    cfg: DrivelineConfig,
    torque_profile: TorqueProfile,
    sample_rate_hz: float,
    duration_s: float,
    oversample: int = 10,
    initial_state=None,
) -> SimOutput:
    """Integrate the driveline and return motor speed and torques at ``sample_rate_hz``.

    Output has ``round(duration_s * sample_rate_hz) + 1`` samples starting at t = 0.
    """
    if not sample_rate_hz > 0 or not duration_s > 0:
        raise InputError("sample rate and duration must be positive")
    if oversample < 1:
        raise InputError("oversample must be >= 1")
    n_out = int(round(duration_s * sample_rate_hz)) + 1
    modes = ground_truth_modes(cfg)
    n_steps = (n_out - 1) * oversample
    h = 1.0 / (sample_rate_hz * oversample)

    A, B = cfg.state_space()
    Phi, G0, Gm, G1 = rk4_matrices(A, B, h)
    if not rk4_stable(A, h):
        raise InputError("RK4 step is unstable for this driveline; increase oversample")

    # torques on the half-step grid: even indices are step boundaries
    t_half = np.arange(2 * n_steps + 1) * (h / 2)
    tau_e, tau_l = torque_profile(t_half)
    u = np.column_stack([np.broadcast_to(tau_e, t_half.shape), np.broadcast_to(tau_l, t_half.shape)])
    forcing = u[0:-1:2] @ G0.T + u[1::2] @ Gm.T + u[2::2] @ G1.T

    x = np.zeros(2 * cfg.n) if initial_state is None else np.array(initial_state, dtype=float)
    states = np.empty((n_out, 2 * cfg.n))
    states[0] = x
    PhiT = Phi.T
    for k in range(n_steps):
        x = x @ PhiT + forcing[k]
        if (k + 1) % oversample == 0:
            states[(k + 1) // oversample] = x

    fs = float(sample_rate_hz)
    return SimOutput(
        speed=TimeSeries(states[:, cfg.n], fs),
        electrical_torque=TimeSeries(u[:: 2 * oversample, 0], fs),
        load_torque=TimeSeries(u[:: 2 * oversample, 1], fs),
        ground_truth_modes=tuple(modes),
        states=states,
    )
