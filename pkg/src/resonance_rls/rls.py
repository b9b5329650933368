"""Recursive least squares with a Joseph-form covariance update.

Each regression point contributes a two-row measurement, so the innovation
covariance S = H P H^T + R is always 2x2 and is inverted in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import EstimationError, InputError
from .regression import RegressionPoint

MAX_INNOVATION_COND = 1e12


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RlsState:
    x_hat: np.ndarray
    P: np.ndarray
    R: np.ndarray
    n_updates: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x_hat", _readonly(self.x_hat))
        object.__setattr__(self, "P", _readonly(self.P))
        object.__setattr__(self, "R", _readonly(self.R))

    @property
    def dim(self) -> int:
        return self.x_hat.size


def check_spd_2x2(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (2, 2) or not np.all(np.isfinite(R)):
        raise InputError("R must be a finite 2x2 matrix")
    if abs(R[0, 1] - R[1, 0]) > 1e-12 * np.abs(R).max():
        raise InputError("R must be symmetric")
    if np.linalg.eigvalsh(R).min() <= 0:
        raise InputError("R must be positive definite")
    return R


def rls_init(p: int, x0, p0_scale: float, R) -> RlsState:
    if p not in (4, 6):
        raise InputError(f"parameter dimension must be 4 or 6, got {p}")
    x0 = np.zeros(p) if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (p,):
        raise InputError(f"x0 must have length {p}")
    if not p0_scale > 0:
        raise InputError("p0_scale must be positive")
    return RlsState(x0, p0_scale * np.eye(p), check_spd_2x2(R), 0)


def _inv_2x2(S: np.ndarray) -> np.ndarray:
    a, b, c, d = S[0, 0], S[0, 1], S[1, 0], S[1, 1]
    det = a * d - b * c
    # eigenvalues of the symmetric part give the condition number
    half_tr = 0.5 * (a + d)
    gap = np.hypot(0.5 * (a - d), 0.5 * (b + c))
    lo, hi = half_tr - gap, half_tr + gap
    if not (lo > 0 and det > 0) or hi > MAX_INNOVATION_COND * lo:
        raise EstimationError("innovation covariance singular")
    return np.array([[d, -b], [-c, a]]) / det


def rls_update(s: RlsState, pt: RegressionPoint) -> RlsState:
    H, z = pt.H, pt.z
    if H.shape[1] != s.dim:
        raise InputError(f"point has {H.shape[1]} parameters, state has {s.dim}")
    P = s.P
    PHt = P @ H.T
    K = PHt @ _inv_2x2(H @ PHt + s.R)
    x = s.x_hat + K @ (z - H @ s.x_hat)
    A = np.eye(s.dim) - K @ H
    P_new = A @ P @ A.T + K @ s.R @ K.T
    return RlsState(x, 0.5 * (P_new + P_new.T), s.R, s.n_updates + 1)


def rls_run_frame(s: RlsState, pts: Iterable[RegressionPoint]) -> RlsState:
    for pt in pts:
        s = rls_update(s, pt)
    return s


def inflate(s: RlsState, Q) -> RlsState:
    """Random-walk covariance inflation P <- P + Q between frames."""
    return replace(s, P=s.P + np.asarray(Q, dtype=float))


def residual_power(x, pts: Iterable[RegressionPoint]) -> float:
    """Median over points of ||z - H x||^2 / 2 (per-row residual power)."""
    return float(np.median([0.5 * float(np.sum(pt.residual(x) ** 2)) for pt in pts]))
