"""Position estimation vs raw measurement.

Runs one noisy frictionless trial and compares the estimator's position
error against the raw sensor error, then repeats over seeds. The cleaned
signal is what the learning loop differentiates through the model inverse,
which is why a high-bandwidth learning filter stays usable despite noise.
"""

import numpy as np

from ilcsim import (ExperimentConfig, ReferenceCommand, Signal,
                    generate_reference, run_trial)

cfg = ExperimentConfig.defaults().override("lugre.enabled", False)
setup = cfg.simulation_setup()
cmd = ReferenceCommand(amplitude=0.05, frequency=0.5)
r, _ = generate_reference(cmd, setup.sample)
ff = Signal(setup.sample, np.zeros(setup.sample.n))

wins = 0
ratios = []
for seed in range(20):
    tr = run_trial(setup, r, ff, noise_seed=seed)
    rmse_est = np.sqrt(np.mean((tr.estimate - tr.output) ** 2))
    rmse_meas = np.sqrt(np.mean((tr.measurement - tr.output) ** 2))
    wins += rmse_est < rmse_meas
    ratios.append(rmse_est / rmse_meas)
    if seed < 3:
        print(f"seed {seed}: estimate rmse {rmse_est:.2e} m, "
              f"raw rmse {rmse_meas:.2e} m")

print(f"\nestimate beats the raw sensor in {wins}/20 runs; "
      f"median error ratio {np.median(ratios):.2f}")
