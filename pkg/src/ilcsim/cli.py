"""Command-line front end.

Subcommands: simulate, build-corpus, train, run-experiment, check-stability,
print-defaults. Exit codes: 0 success, 2 configuration error, 3 stability
refusal (the configured loop fails its convergence precheck), 4 simulation
divergence, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np
import yaml

from .config import ExperimentConfig, default_config_yaml
from .errors import ConfigError, SimulationDiverged, StabilityRefusal
from .filters import build_q_filter
from .ilc import check_monotonic_convergence, check_trial_convergence
from .neural import MlpModel, fit, load_model, save_model
from .output import (ensure_dir, read_corpus_csv, write_corpus_csv, write_csv,
                     write_json, write_yaml)
from .scenario import RunMode, build_training_corpus, run_ilc_experiment
from .signals import (DiscreteTransferFunction, tf_series)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STABILITY = 3
EXIT_DIVERGED = 4
EXIT_IO = 5


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        cfg = ExperimentConfig.defaults()
    else:
        if not os.path.exists(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        cfg = ExperimentConfig.load(args.config)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        cfg = cfg.override(key.strip(), yaml.safe_load(raw))
    return cfg


def _write_resolved(cfg: ExperimentConfig, out_dir: str) -> None:
    write_yaml(os.path.join(out_dir, "resolved_config.yaml"), cfg.resolved())


def _records_payload(result) -> list:
    return [{"iteration": r.iteration, "segment": r.segment, "mse": r.mse,
             "max_abs_error": r.max_abs_error, "effort_norm": r.effort_norm}
            for r in result.records]


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    setup = cfg.simulation_setup()
    schedule = cfg.schedule()
    mode = RunMode(cfg.data["mode"])
    nn = load_model(args.model) if args.model else None
    result = run_ilc_experiment(setup, mode, schedule, nn=nn, keep_traces=True)
    ensure_dir(args.out)
    _write_resolved(cfg, args.out)
    t = setup.sample.times()
    for i, tr in enumerate(result.traces):
        write_csv(os.path.join(args.out, f"trace_iter{i:03d}.csv"),
                  ["t", "r", "y", "y_meas", "y_hat", "u_fb", "u_ff"],
                  [t, tr.reference, tr.output, tr.measurement, tr.estimate,
                   tr.u_feedback, tr.u_feedforward])
    write_json(os.path.join(args.out, "summary.json"), {
        "mode": mode.value,
        "records": _records_payload(result),
        "metadata": result.metadata,
    })
    log.info("wrote %d trial traces to %s", len(result.traces), args.out)
    return EXIT_OK


def cmd_build_corpus(args) -> int:
    cfg = _load_config(args)
    setup = cfg.simulation_setup()
    freqs = cfg.corpus_frequencies()
    c = cfg.data["corpus"]
    data, meta = build_training_corpus(
        setup, freqs, amplitude=float(cfg.data["reference"]["amplitude"]),
        iterations_per_freq=int(c["iterations_per_freq"]),
        workers=int(c["workers"]))
    n_per = setup.sample.n
    freq_col = np.repeat(freqs, n_per)
    ensure_dir(os.path.dirname(os.path.abspath(args.out)))
    write_corpus_csv(args.out, data, freq_col)
    write_json(args.out + ".meta.json", {
        "frequencies": meta,
        "rows": len(data),
        "config": cfg.resolved(),
    })
    log.info("corpus: %d rows over %d frequencies -> %s",
             len(data), len(freqs), args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args)
    try:
        data, _freq = read_corpus_csv(args.corpus)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tr = cfg.data["training"]
    model = MlpModel.initialize(seed=int(tr["init_seed"]),
                                hidden3_relu=bool(tr["hidden3_relu"]))
    from .neural import AdamState
    opt = AdamState.for_model(model, lr=float(tr["learning_rate"]),
                              beta1=float(tr["beta1"]), beta2=float(tr["beta2"]),
                              epsilon=float(tr["epsilon"]))
    model, losses = fit(model, data, cfg.train_spec(), opt=opt)
    ensure_dir(args.out)
    _write_resolved(cfg, args.out)
    save_model(model, os.path.join(args.out, "model.mlp"))
    write_csv(os.path.join(args.out, "loss_curve.csv"), ["epoch", "loss"],
              [np.arange(1, len(losses) + 1), losses])
    write_json(os.path.join(args.out, "training_summary.json"), {
        "rows": len(data), "initial_loss": losses[0], "final_loss": losses[-1],
        "epochs": len(losses),
    })
    log.info("trained on %d rows: loss %.4e -> %.4e", len(data),
             losses[0], losses[-1])
    return EXIT_OK


def _segment_slices(schedule):
    start = 0
    for seg in schedule.segments:
        yield slice(start, start + seg.iterations)
        start += seg.iterations


def cmd_run_experiment(args) -> int:
    cfg = _load_config(args)
    setup = cfg.simulation_setup()
    schedule = cfg.schedule()
    nn = load_model(args.model) if args.model else None
    conventional = run_ilc_experiment(setup, RunMode.ILC, schedule,
                                      keep_traces=False)
    augmented = run_ilc_experiment(setup, RunMode.ILC_WITH_NN, schedule, nn=nn,
                                   keep_traces=False)
    ensure_dir(args.out)
    _write_resolved(cfg, args.out)
    mc = conventional.mse_history
    mn = augmented.mse_history
    iters = np.arange(len(mc))
    write_csv(os.path.join(args.out, "conventional_mse.csv"),
              ["iteration", "mse"], [iters, mc])
    write_csv(os.path.join(args.out, "nn_mse.csv"),
              ["iteration", "mse"], [iters, mn])

    segments = list(_segment_slices(schedule))
    switches = []
    for si in range(1, len(segments)):
        k0 = segments[si].start
        switches.append({
            "segment": si,
            "first_iteration": int(k0),
            "conventional_mse": float(mc[k0]),
            "nn_mse": float(mn[k0]),
            "nn_lower": bool(mn[k0] < mc[k0]),
        })
    per_segment = []
    for si, sl in enumerate(segments):
        conv_final = float(mc[sl][-1])
        threshold = 1.2 * conv_final
        per_segment.append({
            "segment": si,
            "conventional_final_mse": conv_final,
            "nn_final_mse": float(mn[sl][-1]),
            "threshold": threshold,
            "conventional_iterations_to_threshold":
                int(np.argmax(mc[sl] <= threshold)),
            "nn_iterations_to_threshold": int(np.argmax(mn[sl] <= threshold)),
        })
    payload = {
        "switches_present": len(segments) > 1,
        "switches": switches,
        "per_segment": per_segment,
        "nn_model": bool(nn is not None),
        "warm_start": "linear+nn" if nn is not None else "linear_only",
        "metadata": {
            "conventional": conventional.metadata,
            "nn": augmented.metadata,
        },
    }
    write_json(os.path.join(args.out, "comparison.json"), payload)
    log.info("experiment written to %s", args.out)
    return EXIT_OK


def cmd_check_stability(args) -> int:
    cfg = _load_config(args)
    setup = cfg.simulation_setup()
    ilc_cfg = setup.ilc
    ghat = ilc_cfg.model_hat
    mono = check_monotonic_convergence(ilc_cfg, ghat)

    # closed-loop contraction: L*G = beta * nominal sensitivity
    pi = cfg.data["pi"]
    ctrl = DiscreteTransferFunction.from_positive_powers(
        [pi["kp"], pi["ki"] - pi["kp"]], [1.0, -1.0])
    loop = tf_series(ctrl, ghat)
    sens_num = np.convolve(ctrl.a, ghat.a)
    width = max(len(sens_num), len(loop.b))
    den = np.zeros(width)
    den[:len(sens_num)] += sens_num
    den[:len(loop.b)] += loop.b
    sens = DiscreteTransferFunction(b=np.concatenate([sens_num, np.zeros(width - len(sens_num))]),
                                    a=den)
    lg = DiscreteTransferFunction(b=ilc_cfg.beta * sens.b, a=sens.a)
    qtf = build_q_filter(ilc_cfg.q_spec, setup.sample.fs)
    trial = check_trial_convergence(qtf, lg)

    warnings = []
    dc = qtf.dc_gain()
    if abs(dc - 1.0) > 1e-6:
        warnings.append(f"learning filter DC gain is {dc:.6g}, not 1; "
                        "low-frequency error can grow across trials")
    ensure_dir(args.out)
    _write_resolved(cfg, args.out)
    write_csv(os.path.join(args.out, "margin_curves.csv"),
              ["omega", "margin", "bound", "contraction"],
              [mono.omega, mono.margin_curve,
               np.full_like(mono.omega, mono.margin_bound),
               trial.contraction_curve])
    ok = bool(mono.monotonic_ok and trial.trial_ok)
    write_json(os.path.join(args.out, "stability_report.json"), {
        "monotonic_ok": mono.monotonic_ok,
        "margin_bound": mono.margin_bound,
        "margin_peak": float(mono.margin_curve.max()),
        "trial_ok": trial.trial_ok,
        "sup_mismatch": trial.sup_mismatch,
        "sup_inverse_q": trial.sup_inverse_q,
        "q_dc_gain": dc,
        "warnings": warnings,
        "ok": ok,
    })
    for w in warnings:
        log.warning("%s", w)
    if not ok:
        log.error("stability checks failed (margin peak %.4g vs bound %.4g)",
                  mono.margin_curve.max(), mono.margin_bound)
        return EXIT_STABILITY
    log.info("stability checks passed")
    return EXIT_OK


def cmd_print_defaults(_args) -> int:
    sys.stdout.write(default_config_yaml())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ilcsim",
        description="Iterative learning control experiments on a simulated "
                    "friction-laden linear actuator.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="YAML configuration (defaults if omitted)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config value (dotted path)")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="run one mode over the schedule, "
                                        "writing per-trial traces")
    common(p)
    p.add_argument("--model", help="trained effort-estimator file "
                                   "(ilc_with_nn mode)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("build-corpus", help="converge the learning loop over "
                                            "a frequency grid and emit rows")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True, help="corpus CSV path")
    p.set_defaults(fn=cmd_build_corpus)

    p = sub.add_parser("train", help="train the effort estimator on a corpus")
    common(p)
    p.add_argument("--corpus", required=True, help="corpus CSV from build-corpus")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("run-experiment", help="paired conventional vs "
                                              "warm-started comparison")
    common(p)
    p.add_argument("--model", help="trained effort-estimator file; omitted = "
                                   "linear-only warm start")
    p.set_defaults(fn=cmd_run_experiment)

    p = sub.add_parser("check-stability", help="frequency-domain convergence "
                                               "diagnostics")
    common(p)
    p.set_defaults(fn=cmd_check_stability)

    p = sub.add_parser("print-defaults", help="emit the documented default "
                                              "configuration")
    p.set_defaults(fn=cmd_print_defaults)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except StabilityRefusal as exc:
        log.error("stability refusal: %s", exc)
        return EXIT_STABILITY
    except SimulationDiverged as exc:
        log.error("simulation diverged: %s", exc)
        return EXIT_DIVERGED
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
