"""Simulated actuator: a saturated voltage-driven mass-spring-damper opposed
by LuGre bristle friction and observed through a noisy position sensor.

The bristle state is advanced with the exact solution of its linear-in-y
ODE over each substep (velocity held constant), which stays stable for any
step size. The mechanical state uses semi-implicit integration (velocity
first, then position) with a fixed number of substeps per control period.
With friction disabled the step is the exact zero-order-hold solution of
the linear dynamics, so frictionless runs match the discrete nominal model
to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SimulationDiverged
from .signals import StateSpaceModel, c2d_zoh


@dataclass(frozen=True)
class PlantParams:
    """Mechanical and drive constants of the actuator."""

    M: float = 0.5          # moving mass, kg
    C: float = 2.0          # viscous damping, N*s/m
    Ks: float = 800.0       # spring stiffness, N/m
    Kt: float = 10.0        # force constant, N/A
    Ka: float = 10.0        # amplifier transconductance, A/V
    u_max: float = 1.5      # command saturation, V

    def __post_init__(self):
        if self.M <= 0:
            raise ValueError("M must be positive")
        if self.Ks < 0 or self.C < 0:
            raise ValueError("Ks and C must be non-negative")
        if self.u_max <= 0:
            raise ValueError("u_max must be positive")

    @property
    def gain(self) -> float:
        """Force per volt of command."""
        return self.Kt * self.Ka

    def nominal_model(self, dt: float) -> StateSpaceModel:
        return c2d_zoh(self.M, self.C, self.Ks, self.gain, dt)


@dataclass(frozen=True)
class LuGreParams:
    """Bristle friction parameters.

    Defaults are the tabulated simulation values taken verbatim. Note that the
    verbatim sigma0/sigma1 pair gives centimeter-scale bristle deflections and
    a bristle damping term far beyond any realizable actuator force; the
    shipped experiment configuration rescales both by 1e-3 (a per-millimeter
    bristle reading). The steady sliding curve is unaffected because sigma0
    cancels out of it.
    """

    sigma0: float = 1067.0        # bristle stiffness, N/m
    sigma1: float = 1264911.0     # bristle damping, N*s/m
    sigma2: float = 0.7           # viscous coefficient, N*s/m
    Fc: float = 40.0              # Coulomb level, N
    Fs: float = 60.0              # stiction level, N
    vs: float = 0.001             # Stribeck velocity, m/s

    def __post_init__(self):
        if not (self.Fs >= self.Fc > 0):
            raise ValueError("need Fs >= Fc > 0")
        if self.sigma0 <= 0 or self.vs <= 0:
            raise ValueError("sigma0 and vs must be positive")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("sigma1 and sigma2 must be non-negative")


@dataclass(frozen=True)
class PlantState:
    """Position, velocity and internal bristle deflection."""

    x: float = 0.0
    v: float = 0.0
    y_bristle: float = 0.0


@dataclass
class SensorModel:
    """Additive white Gaussian position noise with a seeded, replayable
    stream: the same (seed, k) always yields the same sample."""

    noise_variance: float = 1e-9   # m^2
    rng_seed: int = 0

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        self._cache = np.empty(0)

    def noise_block(self, n: int) -> np.ndarray:
        """First n samples of the noise stream (prefix-stable in n)."""
        if self.noise_variance == 0.0:
            return np.zeros(n)
        if len(self._cache) < n:
            rng = np.random.default_rng(self.rng_seed)
            self._cache = rng.standard_normal(max(n, 2 * len(self._cache))) \
                * math.sqrt(self.noise_variance)
        return self._cache[:n]

    def measure(self, true_position: float, k: int) -> float:
        if self.noise_variance == 0.0:
            return true_position
        if k >= len(self._cache):
            self.noise_block(max(2 * (k + 1), 1024))
        return true_position + self._cache[k]


def measure(sensor: SensorModel, true_position: float, k: int) -> float:
    """Noisy position sample at step k."""
    return sensor.measure(true_position, k)


def lugre_g(params: LuGreParams, v: float) -> float:
    """Stribeck shaping function: bristle deflection that balances a given
    sliding speed. Decreases from Fs/sigma0 at rest to Fc/sigma0 at speed."""
    ratio = v / params.vs
    return (params.Fc + (params.Fs - params.Fc) * math.exp(-(ratio * ratio))) \
        / params.sigma0


def stribeck_curve(params: LuGreParams, v: float) -> float:
    """Steady-sliding friction force at constant velocity v."""
    sgn = 0.0 if v == 0.0 else math.copysign(1.0, v)
    ratio = v / params.vs
    return (params.Fc + (params.Fs - params.Fc) * math.exp(-(ratio * ratio))) \
        * sgn + params.sigma2 * v


def lugre_step(params: LuGreParams, state_y: float, v: float, dt: float):
    """Advance the bristle deflection one step holding v constant.

    The deflection ODE is linear in y for fixed v, so the update uses its
    exact solution; the rate used in the force law is re-evaluated at the
    updated deflection. Returns (new_y, friction force).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if v == 0.0:
        # bristles hold their deflection; no relaxation and no sliding term
        return state_y, params.sigma0 * state_y
    g = lugre_g(params, v)
    lam = abs(v) / g
    y_ss = g if v > 0 else -g
    decay = math.exp(-lam * dt)
    y_new = state_y * decay + y_ss * (1.0 - decay)
    dydt = v - lam * y_new
    friction = params.sigma0 * y_new + params.sigma1 * dydt + params.sigma2 * v
    return y_new, friction


@lru_cache(maxsize=32)
def _zoh_matrices(M, C, Ks, gain, dt):
    model = c2d_zoh(M, C, Ks, gain, dt)
    A, B = model.A, model.B
    return (float(A[0, 0]), float(A[0, 1]), float(A[1, 0]), float(A[1, 1]),
            float(B[0, 0]), float(B[1, 0]))


def plant_step(plant: PlantParams, lugre: LuGreParams | None, state: PlantState,
               u: float, dt: float, n_substeps: int = 10,
               step_index: int = -1) -> PlantState:
    """Advance the actuator one control period under a held command u.

    The command is clamped to +-u_max before it produces force. With
    `lugre=None` the linear dynamics are advanced with the exact ZOH map;
    otherwise the period is split into `n_substeps` semi-implicit substeps
    with the bristle state advanced per substep.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    uc = min(max(u, -plant.u_max), plant.u_max)

    if lugre is None:
        a11, a12, a21, a22, b1, b2 = _zoh_matrices(
            plant.M, plant.C, plant.Ks, plant.gain, dt)
        x = a11 * state.x + a12 * state.v + b1 * uc
        v = a21 * state.x + a22 * state.v + b2 * uc
        if not (math.isfinite(x) and math.isfinite(v)):
            raise SimulationDiverged(step_index)
        return PlantState(x=x, v=v, y_bristle=state.y_bristle)

    h = dt / n_substeps
    x, v, y_br = state.x, state.v, state.y_bristle
    drive = plant.gain * uc
    M, C, Ks = plant.M, plant.C, plant.Ks
    for _ in range(n_substeps):
        y_br, friction = lugre_step(lugre, y_br, v, h)
        acc = (drive - Ks * x - C * v - friction) / M
        v += h * acc
        x += h * v
    if not (math.isfinite(x) and math.isfinite(v) and math.isfinite(y_br)):
        raise SimulationDiverged(step_index)
    return PlantState(x=x, v=v, y_bristle=y_br)
