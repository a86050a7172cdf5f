"""Experiment configuration: defaults, YAML loading with typo rejection,
and resolution into the runtime objects the scenario layer consumes.

Every parameter of every subsystem appears here with its default. Values
fixed by the controller design (feedback gains, low-pass
coefficients, Kalman covariances, friction levels, sampling protocol) keep
those numbers; the remaining plant constants are simulation choices and are
documented as such in the default file emitted by `print-defaults`.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigError
from .estimation import KalmanConfig
from .filters import QFilterSpec
from .ilc import IlcConfig
from .neural import TrainSpec
from .plant import LuGreParams, PlantParams
from .scenario import Segment, SimulationSetup, TaskSchedule
from .signals import ReferenceCommand, SampleSpec

DEFAULTS: dict = {
    "master_seed": 0,
    "mode": "ilc",
    "sample": {"dt": 0.001, "n": 6000},
    "plant": {
        "M": 0.5, "C": 2.0, "Ks": 800.0, "Kt": 10.0, "Ka": 10.0, "u_max": 1.5,
    },
    "lugre": {
        "enabled": True,
        # tabulated friction values with the bristle pair (sigma0, sigma1)
        # rescaled by 1e-3 (per-millimeter deflection reading); the verbatim
        # pair freezes or destabilizes any realizable actuator while leaving
        # the steady sliding curve identical.
        "sigma0": 1.067e6, "sigma1": 1264.911, "sigma2": 0.7,
        "Fc": 40.0, "Fs": 60.0, "vs": 0.001,
    },
    "sensor": {"noise_variance": 1e-9},
    "pi": {"kp": 0.12, "ki": 0.5e-3, "windup_limit": 1.5},
    "kalman": {
        "q_position": 1e-5, "q_velocity": 1e4, "r": 1.0,
        "x0": [0.0, 0.0], "p0_diag": [0.0, 0.0],
        "feed_estimate_to_feedback": False,
    },
    "ilc": {
        "beta": 0.9, "advance": None, "use_estimate": True,
        "clamp_effort": True, "skip_stability_check": False,
    },
    "qfilter": {
        "mode": "tabulated", "order": 4, "cutoff_hz": 40.0,
        "application": "zero_phase", "dc_normalize": True,
    },
    "simulation": {"n_substeps": 10},
    "reference": {"amplitude": 0.05, "phase": 0.0, "offset": 0.0},
    "schedule": [{"frequency": 0.5, "iterations": 20}],
    "corpus": {
        "f_min": 0.5, "f_max": 0.9, "count": 30,
        "frequencies": None, "exclude_frequencies": [],
        "iterations_per_freq": 20, "workers": 1,
    },
    "training": {
        "epochs": 100, "batch_size": 128, "learning_rate": 1e-3,
        "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8,
        "shuffle_seed": 0, "init_seed": 42, "hidden3_relu": True,
    },
}


def _merge(defaults, override, path=""):
    """Deep-merge override into defaults, rejecting unknown keys."""
    if isinstance(defaults, dict):
        if not isinstance(override, dict):
            raise ConfigError(f"expected a mapping at {path or '<root>'}, "
                              f"got {type(override).__name__}")
        out = {}
        for key, dval in defaults.items():
            if key in override:
                out[key] = _merge(dval, override[key], f"{path}.{key}" if path else key)
            else:
                out[key] = copy.deepcopy(dval)
        unknown = set(override) - set(defaults)
        if unknown:
            where = path or "<root>"
            raise ConfigError(
                f"unknown key(s) {sorted(unknown)} under {where}")
        return out
    return copy.deepcopy(override)


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved configuration (all defaults materialized)."""

    data: dict

    @classmethod
    def defaults(cls) -> "ExperimentConfig":
        return cls(data=copy.deepcopy(DEFAULTS))

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        return cls(data=_merge(DEFAULTS, raw or {}))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ConfigError(f"cannot parse {path}{where}: {exc}") from exc
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{path} must contain a mapping at top level")
        return cls.from_dict(raw)

    def override(self, dotted_key: str, value) -> "ExperimentConfig":
        """Return a copy with one dotted-path key replaced (CLI --set)."""
        parts = dotted_key.split(".")
        data = copy.deepcopy(self.data)
        node = data
        for p in parts[:-1]:
            if not isinstance(node, dict) or p not in node:
                raise ConfigError(f"unknown config path {dotted_key!r}")
            node = node[p]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise ConfigError(f"unknown config path {dotted_key!r}")
        node[parts[-1]] = value
        return ExperimentConfig(data=data)

    # ---- resolution into runtime objects ----

    def sample_spec(self) -> SampleSpec:
        s = self.data["sample"]
        return SampleSpec(dt=float(s["dt"]), n=int(s["n"]))

    def plant_params(self) -> PlantParams:
        p = self.data["plant"]
        return PlantParams(M=float(p["M"]), C=float(p["C"]), Ks=float(p["Ks"]),
                           Kt=float(p["Kt"]), Ka=float(p["Ka"]),
                           u_max=float(p["u_max"]))

    def lugre_params(self) -> LuGreParams | None:
        lg = self.data["lugre"]
        if not lg["enabled"]:
            return None
        return LuGreParams(sigma0=float(lg["sigma0"]), sigma1=float(lg["sigma1"]),
                           sigma2=float(lg["sigma2"]), Fc=float(lg["Fc"]),
                           Fs=float(lg["Fs"]), vs=float(lg["vs"]))

    def q_filter_spec(self) -> QFilterSpec:
        q = self.data["qfilter"]
        return QFilterSpec(mode=q["mode"], order=int(q["order"]),
                           cutoff_hz=float(q["cutoff_hz"]),
                           application=q["application"],
                           dc_normalize=bool(q["dc_normalize"]))

    def kalman_config(self) -> KalmanConfig:
        k = self.data["kalman"]
        model = self.plant_params().nominal_model(self.sample_spec().dt)
        return KalmanConfig(
            model=model,
            qcov=np.diag([float(k["q_position"]), float(k["q_velocity"])]),
            r=float(k["r"]),
            x0=np.array([float(v) for v in k["x0"]]),
            p0=np.diag([float(v) for v in k["p0_diag"]]),
        )

    def ilc_config(self) -> IlcConfig:
        i = self.data["ilc"]
        model = self.plant_params().nominal_model(self.sample_spec().dt)
        adv = i["advance"]
        return IlcConfig(model_hat=model.to_transfer_function(),
                         q_spec=self.q_filter_spec(),
                         beta=float(i["beta"]),
                         advance=None if adv is None else int(adv))

    def simulation_setup(self) -> SimulationSetup:
        i = self.data["ilc"]
        pi = self.data["pi"]
        return SimulationSetup(
            sample=self.sample_spec(),
            plant=self.plant_params(),
            lugre=self.lugre_params(),
            kalman=self.kalman_config(),
            ilc=self.ilc_config(),
            noise_variance=float(self.data["sensor"]["noise_variance"]),
            pi_kp=float(pi["kp"]), pi_ki=float(pi["ki"]),
            pi_windup_limit=float(pi["windup_limit"]),
            n_substeps=int(self.data["simulation"]["n_substeps"]),
            master_seed=int(self.data["master_seed"]),
            clamp_effort=bool(i["clamp_effort"]),
            use_estimate_for_ilc=bool(i["use_estimate"]),
            feed_estimate_to_feedback=bool(
                self.data["kalman"]["feed_estimate_to_feedback"]),
            skip_stability_check=bool(i["skip_stability_check"]),
        )

    def reference_command(self, frequency: float,
                          amplitude: float | None = None) -> ReferenceCommand:
        ref = self.data["reference"]
        return ReferenceCommand(
            amplitude=float(ref["amplitude"] if amplitude is None else amplitude),
            frequency=float(frequency),
            phase=float(ref["phase"]), offset=float(ref["offset"]))

    def schedule(self) -> TaskSchedule:
        segs = []
        for row in self.data["schedule"]:
            unknown = set(row) - {"frequency", "iterations", "amplitude"}
            if unknown:
                raise ConfigError(f"unknown schedule key(s) {sorted(unknown)}")
            segs.append(Segment(
                command=self.reference_command(row["frequency"],
                                               row.get("amplitude")),
                iterations=int(row["iterations"])))
        return TaskSchedule(segments=tuple(segs))

    def corpus_frequencies(self) -> list:
        c = self.data["corpus"]
        if c["frequencies"] is not None:
            freqs = [float(f) for f in c["frequencies"]]
        else:
            freqs = list(np.linspace(float(c["f_min"]), float(c["f_max"]),
                                     int(c["count"])))
        excluded = {float(f) for f in c["exclude_frequencies"]}
        return [f for f in freqs if not any(abs(f - e) < 1e-12 for e in excluded)]

    def train_spec(self) -> TrainSpec:
        t = self.data["training"]
        return TrainSpec(epochs=int(t["epochs"]), batch_size=int(t["batch_size"]),
                         shuffle_seed=int(t["shuffle_seed"]))

    def resolved(self) -> dict:
        """Plain nested dict of the full configuration, for metadata files."""
        return copy.deepcopy(self.data)


DEFAULT_CONFIG_YAML = """\
# Complete experiment configuration with every tunable at its default.
# Values marked [design] are fixed by the controller design; values marked
# [sim] are free simulation choices.

master_seed: 0            # seeds all per-trial noise and training shuffles
mode: ilc                 # feedback_only | ilc | ilc_with_nn

sample:
  dt: 0.001               # [design] sampling interval, s
  n: 6000                 # [design] samples per trial (6 s)

plant:
  M: 0.5                  # [sim] moving mass, kg
  C: 2.0                  # [sim] viscous damping, N*s/m
  Ks: 800.0               # [sim] spring stiffness, N/m
  Kt: 10.0                # [sim] force constant, N/A
  Ka: 10.0                # [sim] amplifier gain, A/V
  u_max: 1.5              # [design] command saturation, V

lugre:
  enabled: true
  sigma0: 1.067e+6        # bristle stiffness, N/m (table value x1e3; see README)
  sigma1: 1264.911        # bristle damping, N*s/m (table value x1e-3; see README)
  sigma2: 0.7             # [design] viscous coefficient, N*s/m
  Fc: 40.0                # [design] Coulomb force, N
  Fs: 60.0                # [design] stiction force, N
  vs: 0.001               # [design] Stribeck velocity, m/s

sensor:
  noise_variance: 1.0e-9  # [sim] position sensor noise, m^2

pi:
  kp: 0.12                # [design] proportional gain, V/m
  ki: 0.0005              # [design] integral gain per step, V/m
  windup_limit: 1.5       # [sim] integrator clamp, V

kalman:
  q_position: 1.0e-5      # [design] process noise, position channel
  q_velocity: 1.0e+4      # [design] process noise, velocity channel
  r: 1.0                  # [design] measurement noise covariance
  x0: [0.0, 0.0]          # [design] initial state estimate
  p0_diag: [0.0, 0.0]     # [design] initial covariance diagonal
  feed_estimate_to_feedback: false   # PI uses raw measurement by default

ilc:
  beta: 0.9               # [sim] learning rate, inside the (0, 2) margin
  advance: null           # null = relative degree of the nominal model
  use_estimate: true      # learning error from the Kalman estimate
  clamp_effort: true      # clamp stored effort to +-u_max between trials
  skip_stability_check: false

qfilter:
  mode: tabulated         # tabulated | butterworth
  order: 4                # butterworth order
  cutoff_hz: 40.0         # butterworth cutoff (70 Hz reproduces the
                          # high-bandwidth configuration)
  application: zero_phase # zero_phase | causal
  dc_normalize: true      # scale the tabulated filter's 1.15 DC gain to 1

simulation:
  n_substeps: 10          # [sim] plant substeps per control period

reference:
  amplitude: 0.05         # [sim] sinusoid amplitude, m
  phase: 0.0
  offset: 0.0

schedule:                 # segments run in order; effort handling per mode
  - frequency: 0.5
    iterations: 20

corpus:
  f_min: 0.5              # uniform grid start, Hz
  f_max: 0.9              # uniform grid end, Hz
  count: 30               # number of grid frequencies
  frequencies: null       # explicit list overrides the grid
  exclude_frequencies: [] # held-out frequencies (generalization studies)
  iterations_per_freq: 20
  workers: 1              # >1 parallelizes corpus building

training:
  epochs: 100             # [design]
  batch_size: 128         # [design]
  learning_rate: 0.001    # [sim] Adam step size
  beta1: 0.9              # [sim]
  beta2: 0.999            # [sim]
  epsilon: 1.0e-8         # [sim]
  shuffle_seed: 0
  init_seed: 42
  hidden3_relu: true      # third hidden layer activation (true: ReLU)
"""


def default_config_yaml() -> str:
    return DEFAULT_CONFIG_YAML
