"""Second-order resonance parameterization.

Near a resonance the response is approximated by

    G(jw) ~ c / (-w^2 + 2j*alpha*w + beta)

(the driveline variant carries an extra integrator 1/(jw)).  In the Laplace
domain the denominator is s^2 + 2*alpha*s + beta, so the poles are
-alpha +/- j*sqrt(beta - alpha^2).  All frequencies here are angular (rad/s)
except ``fr_hz``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModeParameters:
    alpha: float
    beta: float
    c: complex = 0j

    @classmethod
    def from_frequency(cls, fr_hz: float, zeta: float, c: complex = 0j) -> "ModeParameters":
        """Inverse of :func:`mode_report` for an underdamped mode."""
        if not fr_hz > 0 or not 0 <= zeta < 1:
            raise InputError(f"need fr_hz > 0 and 0 <= zeta < 1, got ({fr_hz}, {zeta})")
        beta = (TWO_PI * fr_hz) ** 2 / (1.0 - zeta**2)
        return cls(zeta * math.sqrt(beta), beta, complex(c))

    def denominator(self, omega):
        return -np.square(omega) + 2j * self.alpha * np.asarray(omega) + self.beta

    def poles(self) -> tuple[complex, complex]:
        disc = complex(self.alpha**2 - self.beta)
        root = np.sqrt(disc)
        return complex(-self.alpha + root), complex(-self.alpha - root)


@dataclass(frozen=True)
class DrivelineConstants:
    """Input gain ``c_e`` and the lumped load-torque term ``d``."""

    c_e: complex
    d: complex


@dataclass(frozen=True)
class ModeReport:
    fr_hz: float
    zeta: float
    valid: bool
    frame_time_s: float
    alpha: float = 0.0
    beta: float = 0.0


def mode_report(p: ModeParameters, t: float = 0.0) -> ModeReport:
    """Resonant frequency and damping factor of ``p``; never raises.

    Outside the underdamped region the report is flagged invalid and carries
    whatever can still be computed (zeta when beta > 0), zeros otherwise.
    """
    alpha, beta = float(p.alpha), float(p.beta)
    if not (math.isfinite(alpha) and math.isfinite(beta)) or beta <= 0:
        return ModeReport(0.0, 0.0, False, t, alpha, beta)
    zeta = alpha / math.sqrt(beta)
    disc = beta - alpha * alpha
    if disc <= 0:
        return ModeReport(0.0, zeta, False, t, alpha, beta)
    fr_hz = math.sqrt(disc) / TWO_PI
    return ModeReport(fr_hz, zeta, 0 <= zeta < 1, t, alpha, beta)


def eval_siso_response(p: ModeParameters, omega):
    """c / (-w^2 + 2j*alpha*w + beta); accepts scalar or array ``omega``."""
    den = p.denominator(omega)
    if np.any(np.abs(den) < 1e-300):
        raise InputError("pole on evaluation grid")
    out = p.c / den
    return complex(out) if np.ndim(out) == 0 else out


def eval_driveline_response(p: ModeParameters, omega):
    """(1/(jw)) * c_e / (-w^2 + 2j*alpha*w + beta), with ``p.c`` holding c_e."""
    w = np.asarray(omega, dtype=float)
    if np.any(w == 0):
        raise InputError("integrator singularity at DC")
    out = eval_siso_response(p, w) / (1j * w)
    return complex(out) if np.ndim(out) == 0 else out
