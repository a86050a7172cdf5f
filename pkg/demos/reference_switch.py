"""Why a converged effort is not transferable.

The loop converges on a 0.5 Hz task for 10 trials, then the reference
switches to 0.6 Hz while the effort is carried over. The stored effort now
fires the friction compensation at the wrong instants and the error spikes
by two orders of magnitude before the loop re-converges.
"""

from ilcsim import (ExperimentConfig, ReferenceCommand, RunMode, Segment,
                    TaskSchedule, run_ilc_experiment)

setup = ExperimentConfig.defaults().simulation_setup()
schedule = TaskSchedule(segments=(
    Segment(command=ReferenceCommand(amplitude=0.05, frequency=0.5),
            iterations=10),
    Segment(command=ReferenceCommand(amplitude=0.05, frequency=0.6),
            iterations=10),
))
result = run_ilc_experiment(setup, RunMode.ILC, schedule, keep_traces=False)

m = result.mse_history
for rec in result.records:
    marker = "  <- switch" if rec.iteration == 10 else ""
    print(f"trial {rec.iteration:2d} ({0.5 if rec.segment == 0 else 0.6} Hz): "
          f"mse {rec.mse:.3e}{marker}")
print(f"\njump at the switch: {m[10] / m[9]:.0f}x")
