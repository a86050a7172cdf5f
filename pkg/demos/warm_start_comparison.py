"""Conventional learning vs network warm starts across reference changes.

Builds a reduced training corpus (converged efforts on an 8-frequency
grid), trains the effort estimator, then runs the multi-task schedule
(0.6 -> 0.7 -> 0.8 Hz, ten trials each) twice with paired noise: once
carrying the effort across switches, once re-initializing from the
model-inverse linear part plus the network's nonlinear prediction.

Takes a couple of minutes. Pass --quick for a 4-frequency corpus.
"""

import argparse
import os
import time

from ilcsim import (ExperimentConfig, ReferenceCommand, RunMode, Segment,
                    TaskSchedule, build_training_corpus, fit,
                    run_ilc_experiment)
from ilcsim.neural import AdamState, MlpModel


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    cfg = ExperimentConfig.defaults()
    setup = cfg.simulation_setup()
    freqs = [0.6, 0.65, 0.7, 0.75] if args.quick else \
        [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85]

    t0 = time.time()
    data, meta = build_training_corpus(setup, freqs, amplitude=0.05,
                                       iterations_per_freq=20)
    print(f"corpus: {len(data)} rows over {len(freqs)} frequencies "
          f"({time.time() - t0:.0f}s)")

    t0 = time.time()
    model = MlpModel.initialize(seed=42)
    model, losses = fit(model, data, cfg.train_spec(),
                        opt=AdamState.for_model(model))
    explained = 1 - losses[-1] / data.targets.var()
    print(f"training: loss {losses[0]:.3e} -> {losses[-1]:.3e} "
          f"(explains {explained * 100:.0f}% of target variance, "
          f"{time.time() - t0:.0f}s)")

    schedule = TaskSchedule(segments=tuple(
        Segment(command=ReferenceCommand(amplitude=0.05, frequency=f),
                iterations=10) for f in (0.6, 0.7, 0.8)))
    conventional = run_ilc_experiment(setup, RunMode.ILC, schedule,
                                      keep_traces=False)
    warm = run_ilc_experiment(setup, RunMode.ILC_WITH_NN, schedule, nn=model,
                              keep_traces=False)

    mc, mn = conventional.mse_history, warm.mse_history
    print("\ntrial   conventional      warm-started")
    for k in range(len(mc)):
        tag = "  <- switch" if k in (10, 20) else ""
        print(f"{k:4d}    {mc[k]:.3e}        {mn[k]:.3e}{tag}")
    for k in (0, 10, 20):
        print(f"start of segment at trial {k}: warm start is "
              f"{mc[k] / mn[k]:.0f}x lower")

    out = os.path.join(os.path.dirname(__file__), "out")
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "warm_start_mse.csv")
    with open(path, "w") as fh:
        fh.write("iteration,conventional,warm\n")
        for k in range(len(mc)):
            fh.write(f"{k},{mc[k]!r},{mn[k]!r}\n")
    print(f"wrote {path}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        plt.semilogy(mc, "o-", label="conventional (effort carried over)")
        plt.semilogy(mn, "s-", label="network warm start")
        for k in (10, 20):
            plt.axvline(k, color="k", ls=":", lw=0.8)
        plt.xlabel("trial"); plt.ylabel("mse (m^2)"); plt.legend()
        png = os.path.join(out, "warm_start.png")
        plt.savefig(png, dpi=120)
        print(f"wrote {png}")


if __name__ == "__main__":
    main()
