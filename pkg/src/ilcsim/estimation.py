"""Recursive Kalman filter over the nominal linear plant.

Friction is not modeled as a state; the large velocity-channel process
noise absorbs it. The position estimate is the cleaned signal handed to the
learning loop, which is what allows a high-bandwidth learning filter to
coexist with sensor noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationError
from .signals import Signal, StateSpaceModel


def _mat2(x) -> np.ndarray:
    out = np.array(x, dtype=float).reshape(2, 2)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class KalmanConfig:
    """Process model plus noise covariances and the initial belief."""

    model: StateSpaceModel
    qcov: np.ndarray = field(default_factory=lambda: np.diag([1e-5, 1e4]))
    r: float = 1.0
    x0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    p0: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        q = _mat2(self.qcov)
        p = _mat2(self.p0)
        x = np.array(self.x0, dtype=float).reshape(2)
        x.flags.writeable = False
        if self.r <= 0:
            raise ValueError("measurement covariance r must be positive")
        if not np.allclose(q, q.T) or np.any(np.linalg.eigvalsh(q) < 0):
            raise ValueError("qcov must be symmetric positive semidefinite")
        object.__setattr__(self, "qcov", q)
        object.__setattr__(self, "p0", p)
        object.__setattr__(self, "x0", x)

    def initial_state(self) -> "KalmanState":
        return KalmanState(x_hat=self.x0.copy(), P=self.p0.copy())


@dataclass
class KalmanState:
    """Current estimate (position, velocity) and its covariance."""

    x_hat: np.ndarray
    P: np.ndarray


def kalman_measurement_update(cfg: KalmanConfig, x: np.ndarray,
                              P: np.ndarray, z: float):
    """Measurement update with the Joseph-form covariance recursion.

    Returns the corrected (state, covariance) pair; shared by the one-call
    step below and by the trial runner, which interleaves its own predicts.
    """
    s = P[0, 0] + cfg.r
    if s <= 0:
        raise EstimationError(f"innovation covariance {s} is not positive")
    k = P[:, 0] / s
    x = x + k * (z - x[0])
    ikc = np.eye(2)
    ikc[:, 0] -= k
    P = ikc @ P @ ikc.T + np.outer(k, k) * cfg.r
    P = 0.5 * (P + P.T)
    return x, P


def kalman_step(cfg: KalmanConfig, st: KalmanState, u: float, z: float) -> KalmanState:
    """One predict-update cycle: propagate with input u, correct with
    measurement z."""
    A = cfg.model.A
    b = cfg.model.B[:, 0]
    x = A @ st.x_hat + b * u
    P = A @ st.P @ A.T + cfg.qcov
    x, P = kalman_measurement_update(cfg, x, P, z)
    return KalmanState(x_hat=x, P=P)


def kalman_filter_signal(cfg: KalmanConfig, u: Signal, z: Signal) -> Signal:
    """Run the recursion over one trial and return the position estimates.

    The first measurement corrects the initial belief directly (no
    propagation precedes it); afterwards each step propagates with the input
    applied over the preceding interval.
    """
    if u.spec.n != z.spec.n:
        raise ValueError("input and measurement must share one sampling grid")
    n = z.spec.n
    est = np.empty(n)
    x, P = cfg.x0.copy(), cfg.p0.copy()
    x, P = kalman_measurement_update(cfg, x, P, float(z.samples[0]))
    est[0] = x[0]
    A = cfg.model.A
    b = cfg.model.B[:, 0]
    uu = u.samples
    zz = z.samples
    for k in range(1, n):
        x = A @ x + b * uu[k - 1]
        P = A @ P @ A.T + cfg.qcov
        x, P = kalman_measurement_update(cfg, x, P, float(zz[k]))
        est[k] = x[0]
    return Signal(z.spec, est)
