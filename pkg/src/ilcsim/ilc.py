"""Iterative learning core: inverse-model learning function, filtered
update law, frequency-domain convergence diagnostics, and the split of a
converged effort into its linear and nonlinear parts.

The learning function realizes beta * Ghat^-1 non-causally: the improper
inverse is factored into a stable proper filter plus a time advance equal
to the model's relative degree, applied offline with the tail zero-padded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.signal

from .errors import InversionError
from .filters import QFilterSpec, build_q_filter, q_apply
from .signals import (DiscreteTransferFunction, Signal, tf_filtfilt,
                      tf_freq_response)


@dataclass(frozen=True)
class IlcConfig:
    """Learning-loop wiring: rate, low-pass, nominal model, time advance.

    `advance` defaults to the relative degree of the nominal model (the
    exact number of samples the proper part of the inverse must be shifted).
    """

    model_hat: DiscreteTransferFunction
    q_spec: QFilterSpec = field(default_factory=QFilterSpec)
    beta: float = 0.9
    advance: int | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    def effective_advance(self) -> int:
        if self.advance is not None:
            return self.advance
        return self.model_hat.relative_degree()


@dataclass(frozen=True)
class IlcMemory:
    """What the learning loop carries between trials."""

    effort: Signal
    error: Signal
    mse_history: tuple = ()
    iteration: int = 0


@dataclass(frozen=True)
class ConvergenceReport:
    """Frequency-domain convergence diagnostics.

    The monotonic check fills margin_curve/margin_bound/monotonic_ok; the
    trial-contraction check fills contraction_curve and trial_ok together
    with the two sup values it compares.
    """

    omega: np.ndarray
    monotonic_ok: bool | None = None
    margin_curve: np.ndarray | None = None
    margin_bound: float | None = None
    trial_ok: bool | None = None
    contraction_curve: np.ndarray | None = None
    sup_mismatch: float | None = None
    sup_inverse_q: float | None = None


def compute_error(r: Signal, y: Signal) -> Signal:
    """Tracking error r - y."""
    if r.spec.n != y.spec.n:
        raise ValueError("reference and output lengths differ")
    return Signal(r.spec, r.samples - y.samples)


def _stable_inverse_parts(model: DiscreteTransferFunction, advance: int):
    """Split the model inverse into a causal stable filter and a shift."""
    b_trim = model.b[model.relative_degree():]
    zeros = np.roots(b_trim) if len(b_trim) > 1 else np.array([])
    if len(zeros) and np.any(np.abs(zeros) >= 1.0):
        worst = np.abs(zeros).max()
        raise InversionError(
            f"model has a zero of magnitude {worst:.6f} on or outside the "
            "unit circle; its inverse would be unstable")
    return b_trim, advance


def apply_learning_function(cfg: IlcConfig, e: Signal) -> Signal:
    """Filter an error signal through beta * (model inverse).

    The proper part a(z)/b'(z) runs causally from zero initial conditions,
    then the output is advanced by the model's relative degree with the
    freed tail samples zero-padded.
    """
    adv = cfg.effective_advance()
    b_trim, adv = _stable_inverse_parts(cfg.model_hat, adv)
    w = scipy.signal.lfilter(cfg.model_hat.a, b_trim, e.samples)
    out = np.zeros_like(w)
    if adv == 0:
        out[:] = w
    else:
        out[:-adv] = w[adv:]
    return Signal(e.spec, cfg.beta * out)


def ilc_update(cfg: IlcConfig, mem: IlcMemory, e_filtered: Signal) -> IlcMemory:
    """One trial-to-trial update: Q(effort + learning(error)).

    Purely linear in (effort, error); saturation handling belongs to the
    experiment runner, not the update law.
    """
    if mem.effort.spec.n != e_filtered.spec.n:
        raise ValueError("memory and error lengths differ")
    corr = apply_learning_function(cfg, e_filtered)
    raw = Signal(mem.effort.spec, mem.effort.samples + corr.samples)
    qtf = build_q_filter(cfg.q_spec, mem.effort.spec.fs)
    new_effort = q_apply(cfg.q_spec, qtf, raw)
    return replace(
        mem,
        effort=new_effort,
        error=e_filtered,
        mse_history=mem.mse_history + (float(np.mean(e_filtered.samples ** 2)),),
        iteration=mem.iteration + 1,
    )


def check_monotonic_convergence(cfg: IlcConfig,
                                g_true: DiscreteTransferFunction,
                                n_grid: int = 512) -> ConvergenceReport:
    """Inverse-model margin test on a uniform frequency grid.

    Convergence of the inverse-model update is monotonic when the mismatch
    |1/beta - Ghat^-1 G| stays below |1/beta| at every frequency on the
    unit circle.
    """
    if n_grid < 16:
        raise ValueError("n_grid must be at least 16")
    omega = np.linspace(0.0, np.pi, n_grid)
    g = tf_freq_response(g_true, omega)
    ghat = tf_freq_response(cfg.model_hat, omega)
    curve = np.abs(1.0 / cfg.beta - g / ghat)
    bound = abs(1.0 / cfg.beta)
    return ConvergenceReport(
        omega=omega,
        monotonic_ok=bool(np.all(curve < bound)),
        margin_curve=curve,
        margin_bound=bound,
    )


def check_trial_convergence(q: DiscreteTransferFunction,
                            l_times_g: DiscreteTransferFunction,
                            n_grid: int = 512) -> ConvergenceReport:
    """Trial-to-trial contraction test: sup|1 - LG| < sup|1/Q|."""
    if n_grid < 16:
        raise ValueError("n_grid must be at least 16")
    omega = np.linspace(0.0, np.pi, n_grid)
    lg = tf_freq_response(l_times_g, omega)
    qresp = tf_freq_response(q, omega)
    if np.any(np.abs(qresp) < 1e-14):
        raise ZeroDivisionError("Q vanishes on the unit circle; 1/Q undefined")
    mismatch = np.abs(1.0 - lg)
    inv_q = np.abs(1.0 / qresp)
    return ConvergenceReport(
        omega=omega,
        trial_ok=bool(mismatch.max() < inv_q.max()),
        contraction_curve=np.abs(qresp) * mismatch,
        sup_mismatch=float(mismatch.max()),
        sup_inverse_q=float(inv_q.max()),
    )


def linear_feedforward(cfg: IlcConfig, y_d: Signal) -> Signal:
    """Model-based linear part of the converged effort: (Ghat^-1 - 1) y_d,
    band-limited by the learning loop's zero-phase low-pass.

    The raw inverse is ill-conditioned near Nyquist (the sampled plant has a
    zero just inside z = -1), which turns boundary effects into a slowly
    decaying alternating artifact. Band-limiting changes nothing the update
    law could retain: effort outside the low-pass band is stripped by the
    first update anyway.
    """
    unit = replace(cfg, beta=1.0)
    raw = apply_learning_function(unit, y_d)
    ul = Signal(y_d.spec, raw.samples - y_d.samples)
    qtf = build_q_filter(cfg.q_spec, y_d.spec.fs)
    return tf_filtfilt(qtf, ul)


def effort_decompose(cfg: IlcConfig, y_d: Signal, u_converged: Signal):
    """Split a converged effort into (linear model part, nonlinear rest)."""
    if y_d.spec.n != u_converged.spec.n:
        raise ValueError("reference and effort lengths differ")
    u_l = linear_feedforward(cfg, y_d)
    u_n = Signal(y_d.spec, u_converged.samples - u_l.samples)
    return u_l, u_n
