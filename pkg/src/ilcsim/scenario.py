"""Experiment orchestration: closed-loop trials, learning iteration loops,
reference-switching schedules, training-corpus construction and
network-based warm starts.

A trial drives the plant with reference + feedforward + PI feedback (the
reference itself feeds the plant input; the converged effort then splits
into the model-inverse linear part plus a nonlinear remainder, which is
what the effort estimator learns). Per-trial sensor noise is re-seeded from
the master seed and the iteration indices so any experiment replays
bit-identically.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import StabilityRefusal
from .estimation import KalmanConfig, kalman_measurement_update
from .feedback import PiController
from .ilc import (IlcConfig, IlcMemory, check_monotonic_convergence,
                  compute_error, effort_decompose, ilc_update,
                  linear_feedforward)
from .neural import MlpModel, TrainingSet, predict_effort_series
from .plant import LuGreParams, PlantParams, PlantState, SensorModel, plant_step
from .signals import (ReferenceCommand, SampleSpec, Signal,
                      generate_reference)

log = logging.getLogger(__name__)


class RunMode(str, Enum):
    FEEDBACK_ONLY = "feedback_only"
    ILC = "ilc"
    ILC_WITH_NN = "ilc_with_nn"


@dataclass(frozen=True)
class Segment:
    command: ReferenceCommand
    iterations: int

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True)
class TaskSchedule:
    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        object.__setattr__(self, "segments", segs)

    @property
    def total_iterations(self) -> int:
        return sum(s.iterations for s in self.segments)


@dataclass
class SimulationSetup:
    """Everything needed to run trials: plant, sensing, controllers, loop
    configuration and the master seed."""

    sample: SampleSpec
    plant: PlantParams
    lugre: LuGreParams | None
    kalman: KalmanConfig
    ilc: IlcConfig
    noise_variance: float = 1e-9
    pi_kp: float = 0.12
    pi_ki: float = 0.5e-3
    pi_windup_limit: float = 1.5
    n_substeps: int = 10
    master_seed: int = 0
    clamp_effort: bool = True
    use_estimate_for_ilc: bool = True
    feed_estimate_to_feedback: bool = False
    skip_stability_check: bool = False

    def make_pi(self) -> PiController:
        return PiController(kp=self.pi_kp, ki=self.pi_ki,
                            windup_limit=self.pi_windup_limit)


@dataclass
class TrialTraces:
    """Per-step records of one trial, aligned to the sampling grid: entry k
    reflects the state at time k*dt, before that period's command acts."""

    spec: SampleSpec
    reference: np.ndarray
    output: np.ndarray
    velocity: np.ndarray
    measurement: np.ndarray
    estimate: np.ndarray
    u_feedback: np.ndarray
    u_feedforward: np.ndarray
    u_applied: np.ndarray


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    segment: int
    mse: float
    max_abs_error: float
    effort_norm: float


@dataclass
class ExperimentResult:
    records: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def mse_history(self) -> np.ndarray:
        return np.array([r.mse for r in self.records])


def derive_seed(master: int, *indices: int) -> int:
    """Deterministic per-(segment, iteration) noise seed."""
    ss = np.random.SeedSequence((master, *indices))
    return int(ss.generate_state(1, np.uint64)[0])


def run_trial(setup: SimulationSetup, r: Signal, feedforward: Signal,
              noise_seed: int = 0) -> TrialTraces:
    """Execute one closed-loop trial from rest.

    Per step: measure position, form the PI command from the raw (or
    estimated) position error, add reference injection and feedforward,
    saturate, advance the plant, and update the Kalman estimate with the
    saturated command and the measurement.
    """
    spec = r.spec
    if feedforward.spec.n != spec.n:
        raise ValueError("feedforward and reference lengths differ")
    n = spec.n
    dt = spec.dt
    pi = setup.make_pi()
    sensor = SensorModel(noise_variance=setup.noise_variance, rng_seed=noise_seed)
    noise = sensor.noise_block(n)
    kal = setup.kalman.initial_state()
    state = PlantState()
    u_max = setup.plant.u_max

    rr = r.samples
    ff = feedforward.samples
    out = np.empty(n)
    vel = np.empty(n)
    meas_tr = np.empty(n)
    est_tr = np.empty(n)
    ufb_tr = np.empty(n)
    uap_tr = np.empty(n)

    x_hat, P = setup.kalman.x0.copy(), setup.kalman.p0.copy()
    A = setup.kalman.model.A
    bvec = setup.kalman.model.B[:, 0]
    qcov = setup.kalman.qcov
    u_prev = 0.0

    for k in range(n):
        out[k] = state.x
        vel[k] = state.v
        z = state.x + noise[k]
        meas_tr[k] = z
        if k > 0:
            x_hat = A @ x_hat + bvec * u_prev
            P = A @ P @ A.T + qcov
        x_hat, P = kalman_measurement_update(setup.kalman, x_hat, P, z)
        est_tr[k] = x_hat[0]

        fb_input = x_hat[0] if setup.feed_estimate_to_feedback else z
        u_fb = pi.step(rr[k] - fb_input)
        ufb_tr[k] = u_fb
        u = rr[k] + ff[k] + u_fb
        uc = min(max(u, -u_max), u_max)
        uap_tr[k] = uc
        u_prev = uc
        state = plant_step(setup.plant, setup.lugre, state, uc, dt,
                           n_substeps=setup.n_substeps, step_index=k)

    return TrialTraces(spec=spec, reference=rr.copy(), output=out, velocity=vel,
                       measurement=meas_tr, estimate=est_tr, u_feedback=ufb_tr,
                       u_feedforward=ff.copy(), u_applied=uap_tr)


def warm_start_effort(cfg: IlcConfig, cmd: ReferenceCommand, spec: SampleSpec,
                      nn: MlpModel | None = None) -> Signal:
    """Initial effort for a fresh task: model-inverse linear part plus the
    network's nonlinear prediction when a network is supplied."""
    r, _ = generate_reference(cmd, spec)
    u_l = linear_feedforward(cfg, r)
    if nn is None:
        return u_l
    u_n = predict_effort_series(nn, cmd, spec)
    return Signal(spec, u_l.samples + u_n.samples)


def _clamped(setup: SimulationSetup, effort: Signal) -> Signal:
    if not setup.clamp_effort:
        return effort
    lim = setup.plant.u_max
    return Signal(effort.spec, np.clip(effort.samples, -lim, lim))


def precheck_stability(setup: SimulationSetup) -> None:
    """Refuse to run a learning loop whose design fails the inverse-model
    margin test against the nominal plant."""
    report = check_monotonic_convergence(setup.ilc, setup.ilc.model_hat)
    if not report.monotonic_ok and not setup.skip_stability_check:
        raise StabilityRefusal(
            f"learning rate {setup.ilc.beta} violates the convergence margin; "
            "override with skip_stability_check to run anyway")


def run_ilc_experiment(setup: SimulationSetup, mode: RunMode,
                       schedule: TaskSchedule, nn: MlpModel | None = None,
                       keep_traces: bool = True) -> ExperimentResult:
    """Run a full (possibly multi-segment) experiment in one mode.

    Conventional learning carries its effort across a reference switch; the
    network-augmented mode re-initializes from the warm start at every
    segment boundary. Feedback-only runs trials with zero feedforward.
    """
    if mode != RunMode.FEEDBACK_ONLY:
        precheck_stability(setup)
    spec = setup.sample
    result = ExperimentResult(metadata={
        "mode": mode.value,
        "master_seed": setup.master_seed,
        "q_application": setup.ilc.q_spec.application,
        "nn_present": nn is not None,
        "segments": [
            {"frequency": s.command.frequency, "amplitude": s.command.amplitude,
             "iterations": s.iterations} for s in schedule.segments],
    })
    effort = Signal(spec, np.zeros(spec.n))
    global_iter = 0
    for si, seg in enumerate(schedule.segments):
        r, _ = generate_reference(seg.command, spec)
        if mode == RunMode.ILC_WITH_NN:
            effort = _clamped(setup, warm_start_effort(setup.ilc, seg.command,
                                                       spec, nn))
        elif mode == RunMode.FEEDBACK_ONLY:
            effort = Signal(spec, np.zeros(spec.n))
        mem = IlcMemory(effort=effort, error=Signal(spec, np.zeros(spec.n)))
        for j in range(seg.iterations):
            seed = derive_seed(setup.master_seed, si, j)
            traces = run_trial(setup, r, effort, noise_seed=seed)
            err_source = traces.estimate if setup.use_estimate_for_ilc \
                else traces.measurement
            e_hat = compute_error(r, Signal(spec, err_source))
            e_true = r.samples - traces.output
            result.records.append(IterationRecord(
                iteration=global_iter, segment=si,
                mse=float(np.mean(e_true ** 2)),
                max_abs_error=float(np.abs(e_true).max()),
                effort_norm=float(np.linalg.norm(effort.samples)),
            ))
            if keep_traces:
                result.traces.append(traces)
            global_iter += 1
            if mode != RunMode.FEEDBACK_ONLY:
                mem = ilc_update(setup.ilc, mem, e_hat)
                effort = _clamped(setup, mem.effort)
        log.info("segment %d (%.3g Hz): mse %.3e -> %.3e", si,
                 seg.command.frequency,
                 result.records[global_iter - seg.iterations].mse,
                 result.records[-1].mse)
    return result


def _corpus_for_frequency(setup: SimulationSetup, cmd: ReferenceCommand,
                          iterations: int, freq_index: int):
    """Converged-effort rows for one reference command."""
    schedule = TaskSchedule(segments=(Segment(command=cmd, iterations=iterations),))
    inner = replace(setup, master_seed=derive_seed(setup.master_seed,
                                                   10_000 + freq_index))
    res = run_ilc_experiment(inner, RunMode.ILC, schedule, keep_traces=True)
    mses = res.mse_history
    deltas = np.abs(np.diff(mses[-3:])) / np.maximum(mses[-3:-1], 1e-300)
    converged = bool(len(mses) >= 3 and np.all(deltas < 0.01))
    u_conv = Signal(setup.sample, res.traces[-1].u_feedforward)
    r, rdot = generate_reference(cmd, setup.sample)
    _, u_n = effort_decompose(setup.ilc, r, u_conv)
    feats = np.column_stack([r.samples, rdot.samples])
    return feats, u_n.samples, converged, float(mses[-1])


def build_training_corpus(setup: SimulationSetup, frequencies,
                          amplitude: float, iterations_per_freq: int = 20,
                          workers: int = 1):
    """Converge the conventional loop at each frequency and emit per-sample
    ((reference, reference rate) -> nonlinear effort) rows.

    A frequency whose loop design fails the convergence precheck raises,
    naming the frequency. Rows are concatenated in frequency order whatever
    the worker count. Returns (TrainingSet, per-frequency metadata).
    """
    frequencies = list(frequencies)
    if len(frequencies) < 1:
        raise ValueError("need at least one frequency")
    for f in frequencies:
        try:
            precheck_stability(setup)
        except StabilityRefusal as exc:
            raise StabilityRefusal(
                f"stability precheck failed for {f} Hz: {exc}") from None
    jobs = [(setup, ReferenceCommand(amplitude=amplitude, frequency=f),
             iterations_per_freq, fi) for fi, f in enumerate(frequencies)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_corpus_job, jobs))
    else:
        outs = [_corpus_job(j) for j in jobs]
    feats = np.vstack([o[0] for o in outs])
    targs = np.concatenate([o[1] for o in outs])
    meta = [{"frequency": f, "converged": o[2], "final_mse": o[3]}
            for f, o in zip(frequencies, outs)]
    for row in meta:
        if not row["converged"]:
            log.warning("corpus frequency %.3g Hz not fully converged after "
                        "%d iterations; using final iterate",
                        row["frequency"], iterations_per_freq)
    return TrainingSet(features=feats, targets=targs), meta


def _corpus_job(args):
    return _corpus_for_frequency(*args)
