"""Learning-loop low-pass (Q) filter construction and application policy.

Two construction modes are supported: the tabulated fourth-order low-pass
shipped with the controller design (printed coefficients, cutoff near
0.04*fs) and a synthesized Butterworth low-pass at a configurable cutoff.
Application is either causal or zero-phase; learning updates run between
trials, so the zero-phase (forward-backward) form is the default policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.signal

from .signals import (DiscreteTransferFunction, Signal, tf_filter, tf_filtfilt)

# Tabulated fourth-order low-pass, written in descending positive powers of z.
TABULATED_Q_NUM = tuple(1e-2 * c for c in (0.3, 1.0, 2.0, 1.0, 0.3))
TABULATED_Q_DEN = (1.0, -2.61, 2.72, -1.31, 0.24)

MODE_TABULATED = "tabulated"
MODE_BUTTERWORTH = "butterworth"
MODE_IDENTITY = "identity"
APPLY_CAUSAL = "causal"
APPLY_ZERO_PHASE = "zero_phase"


@dataclass(frozen=True)
class QFilterSpec:
    """How to build and apply the learning-loop low-pass."""

    mode: str = MODE_TABULATED
    order: int = 4
    cutoff_hz: float = 40.0
    application: str = APPLY_ZERO_PHASE
    dc_normalize: bool = True

    def __post_init__(self):
        if self.mode not in (MODE_TABULATED, MODE_BUTTERWORTH, MODE_IDENTITY):
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if self.application not in (APPLY_CAUSAL, APPLY_ZERO_PHASE):
            raise ValueError(f"unknown application {self.application!r}")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.cutoff_hz <= 0:
            raise ValueError("cutoff must be positive")


@lru_cache(maxsize=64)
def _build_cached(spec: QFilterSpec, fs: float) -> DiscreteTransferFunction:
    if spec.mode == MODE_IDENTITY:
        return DiscreteTransferFunction(b=np.ones(1), a=np.ones(1))
    if spec.mode == MODE_TABULATED:
        tf = DiscreteTransferFunction.from_positive_powers(
            TABULATED_Q_NUM, TABULATED_Q_DEN)
    else:
        if spec.cutoff_hz >= fs / 2:
            raise ValueError(
                f"cutoff {spec.cutoff_hz} Hz must be below Nyquist {fs / 2} Hz")
        b, a = scipy.signal.butter(spec.order, spec.cutoff_hz, fs=fs)
        tf = DiscreteTransferFunction(b=b, a=a)
    if spec.dc_normalize:
        dc = tf.dc_gain()
        tf = DiscreteTransferFunction(b=tf.b / dc, a=tf.a)
    return tf


def build_q_filter(spec: QFilterSpec, fs: float) -> DiscreteTransferFunction:
    """Realize the filter for sampling rate fs (Hz)."""
    return _build_cached(spec, float(fs))


def q_apply(spec: QFilterSpec, tf: DiscreteTransferFunction, x: Signal) -> Signal:
    """Apply the filter with the configured application policy."""
    if spec.application == APPLY_ZERO_PHASE:
        return tf_filtfilt(tf, x)
    return tf_filter(tf, x)
