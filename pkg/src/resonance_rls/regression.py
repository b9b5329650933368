"""Linear measurement equations z(w) = H(w) x for the resonance model.

SISO variant, x = (alpha, beta, c_r, c_i).  Expanding
(-w^2 + 2j*alpha*w + beta)(Y_r + jY_i) = (c_r + jc_i)(U_r + jU_i)
and moving the w^2 terms left gives

    real:  w^2 Y_r = -2w Y_i*alpha + Y_r*beta - U_r*c_r + U_i*c_i
    imag:  w^2 Y_i =  2w Y_r*alpha + Y_i*beta - U_i*c_r - U_r*c_i

Driveline variant, x = (alpha, beta, c_er, c_ei, d_r, d_i).  Expanding
jw(-w^2 + 2j*alpha*w + beta)(W_r + jW_i) = c_e*tau_e + d with W the shaft
speed spectrum gives

    real:   w^3 W_i = 2w^2 W_r*alpha + w W_i*beta + tau_r*c_er - tau_i*c_ei + d_r
    imag:  -w^3 W_r = 2w^2 W_i*alpha - w W_r*beta + tau_i*c_er + tau_r*c_ei + d_i
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError
from .modeling import DrivelineConstants, ModeParameters
from .signals import FrequencyBand, SpectrumFrame


class Variant(str, Enum):
    SISO = "siso"
    DRIVELINE = "driveline"

    @property
    def n_params(self) -> int:
        return 4 if self is Variant.SISO else 6


@dataclass(frozen=True)
class RegressionPoint:
    z: np.ndarray
    H: np.ndarray
    omega: float
    frame_time_s: float
    variant: Variant

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        H = np.array(self.H, dtype=float)
        if z.shape != (2,) or H.shape != (2, Variant(self.variant).n_params):
            raise InputError(f"bad regression point shapes z{z.shape}, H{H.shape}")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(H))):
            raise InputError("non-finite regression point")
        z.setflags(write=False)
        H.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "variant", Variant(self.variant))

    def residual(self, x) -> np.ndarray:
        return self.z - self.H @ np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ParameterVector:
    entries: np.ndarray
    variant: Variant

    def __post_init__(self):
        variant = Variant(self.variant)
        entries = np.array(self.entries, dtype=float)
        if entries.shape != (variant.n_params,):
            raise InputError(f"{variant.value} parameter vector needs {variant.n_params} entries")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "variant", variant)

    @classmethod
    def from_mode(
        cls, p: ModeParameters, variant: Variant, d: complex = 0j
    ) -> "ParameterVector":
        x = [p.alpha, p.beta, p.c.real, p.c.imag]
        if Variant(variant) is Variant.DRIVELINE:
            x += [d.real, d.imag]
        return cls(np.array(x), variant)

    @property
    def mode(self) -> ModeParameters:
        a, b, cr, ci = self.entries[:4]
        return ModeParameters(float(a), float(b), complex(cr, ci))

    @property
    def driveline_constants(self) -> DrivelineConstants:
        if self.variant is not Variant.DRIVELINE:
            raise InputError("SISO parameter vector has no load term")
        e = self.entries
        return DrivelineConstants(complex(e[2], e[3]), complex(e[4], e[5]))


def _check_finite(*values):
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise InputError(f"non-finite spectrum value {v!r}")


def siso_rows(omega, Y, U) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised SISO measurement vectors, shapes (n, 2) and (n, 2, 4)."""
    w = np.asarray(omega, dtype=float)
    Y = np.asarray(Y, dtype=complex)
    U = np.asarray(U, dtype=complex)
    yr, yi, ur, ui = Y.real, Y.imag, U.real, U.imag
    z = np.stack([w**2 * yr, w**2 * yi], axis=-1)
    H = np.stack(
        [
            np.stack([-2 * w * yi, yr, -ur, ui], axis=-1),
            np.stack([2 * w * yr, yi, -ui, -ur], axis=-1),
        ],
        axis=-2,
    )
    return z, H


def driveline_rows(omega, Omega, tau_e) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised driveline measurement vectors, shapes (n, 2) and (n, 2, 6)."""
    w = np.asarray(omega, dtype=float)
    W = np.asarray(Omega, dtype=complex)
    T = np.asarray(tau_e, dtype=complex)
    wr, wi, tr, ti = W.real, W.imag, T.real, T.imag
    one, zero = np.ones_like(w), np.zeros_like(w)
    z = np.stack([w**3 * wi, -(w**3) * wr], axis=-1)
    H = np.stack(
        [
            np.stack([2 * w**2 * wr, w * wi, tr, -ti, one, zero], axis=-1),
            np.stack([2 * w**2 * wi, -w * wr, ti, tr, zero, one], axis=-1),
        ],
        axis=-2,
    )
    return z, H


def build_siso_point(omega: float, Y: complex, U: complex, t: float = 0.0) -> RegressionPoint:
    if not omega > 0:
        raise InputError(f"omega must be positive, got {omega}")
    Y, U = complex(Y), complex(U)
    _check_finite(Y, U)
    z, H = siso_rows(omega, Y, U)
    return RegressionPoint(z, H, float(omega), t, Variant.SISO)


def build_driveline_point(
    omega: float, Omega: complex, tau_e: complex, t: float = 0.0
) -> RegressionPoint:
    if not omega > 0:
        raise InputError(f"omega must be positive, got {omega} (integrator term is singular at DC)")
    Omega, tau_e = complex(Omega), complex(tau_e)
    _check_finite(Omega, tau_e)
    z, H = driveline_rows(omega, Omega, tau_e)
    return RegressionPoint(z, H, float(omega), t, Variant.DRIVELINE)


def band_points(
    u_frame: SpectrumFrame,
    y_frame: SpectrumFrame,
    band: FrequencyBand,
    variant: Variant | str,
) -> list[RegressionPoint]:
    """One regression point per bin inside ``band``, ascending in frequency."""
    variant = Variant(variant)
    if not u_frame.same_grid(y_frame):
        raise InputError("input and output frames are on different frequency grids")
    inside = band.mask(u_frame.bin_freqs_hz) & (u_frame.bin_freqs_hz > 0)
    if not inside.any():
        raise InputError(f"empty band: no bins in [{band.f_min_hz}, {band.f_max_hz}] Hz")
    omega = 2 * math.pi * u_frame.bin_freqs_hz[inside]
    U = u_frame.bin_values[inside]
    Y = y_frame.bin_values[inside]
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(Y))):
        raise InputError("non-finite spectrum value in band")
    rows = siso_rows if variant is Variant.SISO else driveline_rows
    z, H = rows(omega, Y, U)
    t = u_frame.frame_time_s
    return [RegressionPoint(z[i], H[i], float(omega[i]), t, variant) for i in range(len(omega))]


def stack(points) -> tuple[np.ndarray, np.ndarray]:
    """Stack points into one (2n,) vector and (2n, p) matrix for batch solves."""
    Z = np.concatenate([pt.z for pt in points])
    H = np.vstack([pt.H for pt in points])
    return Z, H
