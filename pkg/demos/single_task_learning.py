"""Friction compensation on a single task.

Runs the learning loop for 20 trials of a 0.5 Hz sinusoid and prints the
per-trial mean squared tracking error. The first trial (no feedforward yet)
barely moves the load: friction dominates the weak feedback loop. The loop
then builds a feedforward effort that breaks stiction on time and cancels
the friction pattern.
"""

import argparse
import os

from ilcsim import (ExperimentConfig, ReferenceCommand, RunMode, Segment,
                    TaskSchedule, run_ilc_experiment)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iterations", type=int, default=20)
    ap.add_argument("--frequency", type=float, default=0.5)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    setup = ExperimentConfig.defaults().simulation_setup()
    schedule = TaskSchedule(segments=(Segment(
        command=ReferenceCommand(amplitude=0.05, frequency=args.frequency),
        iterations=args.iterations),))
    result = run_ilc_experiment(setup, RunMode.ILC, schedule)

    m = result.mse_history
    print(f"{args.frequency} Hz task, {args.iterations} trials")
    for rec in result.records:
        print(f"  trial {rec.iteration:2d}: mse {rec.mse:.3e}   "
              f"max|e| {rec.max_abs_error:.4f} m")
    print(f"reduction: {(1 - m[-1] / m[0]) * 100:.1f}%")

    out = os.path.join(os.path.dirname(__file__), "out")
    os.makedirs(out, exist_ok=True)
    first, last = result.traces[0], result.traces[-1]
    t = setup.sample.times()
    path = os.path.join(out, "single_task_traces.csv")
    with open(path, "w") as fh:
        fh.write("t,r,y_first,y_last,u_ff_last\n")
        for row in zip(t, first.reference, first.output, last.output,
                       last.u_feedforward):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    print(f"wrote {path}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6))
        ax1.plot(t, first.reference, "k--", label="reference")
        ax1.plot(t, first.output, label="first trial")
        ax1.plot(t, last.output, label="after learning")
        ax1.set_xlabel("t (s)"); ax1.set_ylabel("position (m)"); ax1.legend()
        ax2.semilogy(m, "o-")
        ax2.set_xlabel("trial"); ax2.set_ylabel("mse (m^2)")
        png = os.path.join(out, "single_task.png")
        fig.tight_layout(); fig.savefig(png, dpi=120)
        print(f"wrote {png}")


if __name__ == "__main__":
    main()
