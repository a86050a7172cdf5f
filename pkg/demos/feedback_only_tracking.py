"""What friction does to a plain feedback loop.

One trial with the PI controller and no feedforward. Prints where the load
sticks (velocity pinned near zero around every reference reversal) and how
large the tracking error stays.
"""

import numpy as np

from ilcsim import (ExperimentConfig, ReferenceCommand, RunMode, Segment,
                    TaskSchedule, run_ilc_experiment)

setup = ExperimentConfig.defaults().simulation_setup()
schedule = TaskSchedule(segments=(Segment(
    command=ReferenceCommand(amplitude=0.05, frequency=0.5), iterations=1),))
result = run_ilc_experiment(setup, RunMode.FEEDBACK_ONLY, schedule)

tr = result.traces[0]
print(f"feedback only, 0.5 Hz: mse {result.records[0].mse:.3e}, "
      f"max|y| {np.abs(tr.output).max():.4f} m "
      f"(reference amplitude 0.05 m)")

rd = np.gradient(tr.reference, tr.spec.dt)
crossings = np.where(np.diff(np.sign(rd)) != 0)[0]
for k0 in crossings:
    lo, hi = max(0, k0 - 250), min(tr.spec.n, k0 + 250)
    stuck = int(np.sum(np.abs(tr.velocity[lo:hi]) < 1e-5))
    print(f"  reversal near t={k0 * tr.spec.dt:.2f}s: "
          f"{stuck} samples with |v| < 1e-5 m/s")
