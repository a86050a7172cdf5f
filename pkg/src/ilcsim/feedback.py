"""Discrete PI feedback controller with integrator clamping."""

from dataclasses import dataclass, field


@dataclass
class PiController:
    """PI law u = kp*e + I, where I accumulates ki*e one step delayed.

    The delayed accumulation realizes the strictly proper integral term
    ki/(z-1). The integrator is clamped to +-windup_limit so sustained
    saturation cannot wind it up.
    """

    kp: float = 0.12
    ki: float = 0.5e-3
    windup_limit: float = 1.5
    integrator: float = field(default=0.0)

    def step(self, e: float) -> float:
        out = self.kp * e + self.integrator
        nxt = self.integrator + self.ki * e
        self.integrator = min(max(nxt, -self.windup_limit), self.windup_limit)
        return out

    def reset(self) -> None:
        self.integrator = 0.0
