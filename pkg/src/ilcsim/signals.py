"""Sampling grids, reference generation, discrete transfer functions and
frequency-domain evaluation.

Everything downstream (plant simulation, learning updates, Kalman filtering)
is built on the types here. Transfer functions are stored as coefficient
arrays in ascending powers of z^-1 with the leading denominator coefficient
normalized to 1, which makes them directly usable as difference equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .errors import FilterInstabilityError, PoleOnUnitCircleError


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SampleSpec:
    """Uniform sampling grid: `n` samples spaced `dt` seconds apart."""

    dt: float = 0.001
    n: int = 6000

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n}")

    @property
    def fs(self) -> float:
        return 1.0 / self.dt

    @property
    def duration(self) -> float:
        return self.n * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt


@dataclass(frozen=True)
class Signal:
    """A uniformly sampled real sequence bound to its sampling grid."""

    spec: SampleSpec
    samples: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.samples)
        if arr.ndim != 1 or len(arr) != self.spec.n:
            raise ValueError(
                f"expected {self.spec.n} samples, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("signal contains non-finite samples")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.spec.n


@dataclass(frozen=True)
class ReferenceCommand:
    """Sinusoidal position reference: offset + amplitude*sin(2*pi*f*t + phase)."""

    amplitude: float
    frequency: float
    phase: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")


def generate_reference(cmd: ReferenceCommand, spec: SampleSpec):
    """Sampled reference position and its analytic time derivative."""
    t = spec.times()
    w = 2.0 * np.pi * cmd.frequency
    pos = cmd.offset + cmd.amplitude * np.sin(w * t + cmd.phase)
    vel = cmd.amplitude * w * np.cos(w * t + cmd.phase)
    return Signal(spec, pos), Signal(spec, vel)


@dataclass(frozen=True)
class DiscreteTransferFunction:
    """Rational filter b(z^-1)/a(z^-1), coefficients in ascending powers of
    z^-1, a[0] normalized to 1 on construction."""

    b: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.ones(1))

    def __post_init__(self):
        b = np.atleast_1d(np.array(self.b, dtype=float))
        a = np.atleast_1d(np.array(self.a, dtype=float))
        if b.size == 0 or a.size == 0:
            raise ValueError("coefficient arrays must be non-empty")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
            raise ValueError("coefficients must be finite")
        if a[0] == 0.0:
            raise ValueError("leading denominator coefficient must be nonzero")
        if a[0] != 1.0:
            b = b / a[0]
            a = a / a[0]
        object.__setattr__(self, "b", _readonly(b))
        object.__setattr__(self, "a", _readonly(a))

    @classmethod
    def from_positive_powers(cls, num, den) -> "DiscreteTransferFunction":
        """Build from polynomials written in descending positive powers of z.

        Both polynomials are divided by z^max(deg) so the result is the same
        rational function expressed in z^-1 form.
        """
        num = np.atleast_1d(np.array(num, dtype=float))
        den = np.atleast_1d(np.array(den, dtype=float))
        deg = max(len(num), len(den)) - 1
        b = np.concatenate([np.zeros(deg + 1 - len(num)), num])
        a = np.concatenate([np.zeros(deg + 1 - len(den)), den])
        return cls(b=b, a=a)

    def relative_degree(self) -> int:
        """Number of leading (near-)zero numerator coefficients: the pure
        input-output delay of the filter in samples."""
        tol = 1e-12 * max(np.abs(self.b).max(), 1e-300)
        for i, coeff in enumerate(self.b):
            if abs(coeff) > tol:
                return i
        raise ValueError("numerator is identically zero")

    def is_stable(self) -> bool:
        """All denominator roots strictly inside the unit circle."""
        if len(self.a) == 1:
            return True
        return bool(np.all(np.abs(np.roots(self.a)) < 1.0))

    def zeros(self) -> np.ndarray:
        nz = self.b[self.relative_degree():]
        if len(nz) == 1:
            return np.array([])
        return np.roots(nz)

    def dc_gain(self) -> float:
        return float(np.sum(self.b) / np.sum(self.a))


def identity_tf() -> DiscreteTransferFunction:
    return DiscreteTransferFunction(b=np.ones(1), a=np.ones(1))


def tf_series(f: DiscreteTransferFunction,
              g: DiscreteTransferFunction) -> DiscreteTransferFunction:
    """Cascade f*g via polynomial convolution."""
    return DiscreteTransferFunction(b=np.convolve(f.b, g.b),
                                    a=np.convolve(f.a, g.a))


def tf_scale(f: DiscreteTransferFunction, k: float) -> DiscreteTransferFunction:
    return DiscreteTransferFunction(b=k * f.b, a=f.a)


def tf_filter(tf: DiscreteTransferFunction, x: Signal) -> Signal:
    """Causal direct-form filtering with zero initial conditions."""
    y = scipy.signal.lfilter(tf.b, tf.a, x.samples)
    if not np.all(np.isfinite(y)):
        raise FilterInstabilityError(
            "causal filter produced non-finite output (unstable filter?)")
    return Signal(x.spec, y)


def tf_filtfilt(tf: DiscreteTransferFunction, x: Signal) -> Signal:
    """Zero-phase filtering: forward pass, then reversed pass.

    The input is extended by reflection (3*max(len(a), len(b)) samples at
    each end) before the two passes and trimmed afterwards, suppressing
    startup transients at the signal boundaries.
    """
    if not tf.is_stable():
        raise FilterInstabilityError(
            "zero-phase filtering requires a stable filter")
    if len(tf.a) == 1 and len(tf.b) == 1:
        return Signal(x.spec, (tf.b[0] / tf.a[0]) ** 2 * x.samples)
    padlen = 3 * max(len(tf.a), len(tf.b))
    y = scipy.signal.filtfilt(tf.b, tf.a, x.samples, padlen=min(padlen, x.spec.n - 1))
    if not np.all(np.isfinite(y)):
        raise FilterInstabilityError("zero-phase filter produced non-finite output")
    return Signal(x.spec, y)


def tf_freq_response(tf: DiscreteTransferFunction, omega):
    """Evaluate the filter at z = e^{j*omega}, omega in radians/sample.

    Accepts a scalar or an array of frequencies in [0, pi].
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w < 0) or np.any(w > np.pi + 1e-12):
        raise ValueError("omega must lie in [0, pi]")
    z_inv = np.exp(-1j * w)
    num = np.polynomial.polynomial.polyval(z_inv, tf.b)
    den = np.polynomial.polynomial.polyval(z_inv, tf.a)
    scale = max(float(np.abs(tf.a).max()), 1e-300)
    if np.any(np.abs(den) < 1e-12 * scale):
        raise PoleOnUnitCircleError(
            "transfer function has a pole on the evaluation circle")
    h = num / den
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(h[0])
    return h


@dataclass(frozen=True)
class StateSpaceModel:
    """Discrete-time state-space model x+ = A x + B u, y = C x + D u."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    dt: float

    def __post_init__(self):
        A = _readonly(self.A)
        B = _readonly(np.reshape(self.B, (A.shape[0], 1)))
        C = _readonly(np.reshape(self.C, (1, A.shape[0])))
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    def to_transfer_function(self) -> DiscreteTransferFunction:
        num, den = scipy.signal.ss2tf(self.A, self.B, self.C, [[self.D]])
        return DiscreteTransferFunction.from_positive_powers(num.ravel(), den)


def c2d_zoh(M: float, C: float, Ks: float, gain: float, dt: float) -> StateSpaceModel:
    """Zero-order-hold discretization of gain / (M s^2 + C s + Ks).

    Built from the matrix exponential of the augmented (A, B) system, which
    is exact and covers singular continuous dynamics (Ks = C = 0) without a
    special case. The output row selects position; D = 0.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    Ac = np.array([[0.0, 1.0], [-Ks / M, -C / M]])
    Bc = np.array([[0.0], [gain / M]])
    Ad, Bd, Cd, Dd, _ = scipy.signal.cont2discrete(
        (Ac, Bc, np.array([[1.0, 0.0]]), np.array([[0.0]])), dt, method="zoh")
    return StateSpaceModel(A=Ad, B=Bd, C=Cd, D=0.0, dt=dt)


def mse(a, b) -> float:
    """Mean squared difference between two equally long sequences."""
    xa = a.samples if isinstance(a, Signal) else np.asarray(a, dtype=float)
    xb = b.samples if isinstance(b, Signal) else np.asarray(b, dtype=float)
    if xa.shape != xb.shape:
        raise ValueError(f"length mismatch: {xa.shape} vs {xb.shape}")
    return float(np.mean((xa - xb) ** 2))
