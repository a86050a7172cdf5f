"""Acceptance criteria, one test per criterion, each printing a PASS line
with the measured quantity next to its required tolerance. Everything runs
on the default configuration (plus the overrides each criterion states)."""

import filecmp
import math
import os
import time

import numpy as np

from ilcsim import (ReferenceCommand, RunMode, Segment,
                    Signal, TaskSchedule, cli, generate_reference,
                    run_ilc_experiment, run_trial)
from ilcsim.filters import MODE_BUTTERWORTH, QFilterSpec, build_q_filter
from ilcsim.ilc import IlcConfig, check_monotonic_convergence
from ilcsim.plant import lugre_g, lugre_step
from ilcsim.signals import tf_freq_response
from tests.conftest import single_segment_schedule
from tests.test_neural import finite_difference_audit


def announce(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num}: {status} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_1_lugre_steady_state_oracle(default_config):
    target = 40.0 + 20.0 * math.exp(-1.0) + 0.7e-3
    v = 1e-3
    results = {}
    for label, params in (("configured", default_config.lugre_params()),
                          ("tabulated", __import__("ilcsim").LuGreParams())):
        lam = abs(v) / lugre_g(params, v)
        y, friction = 0.0, None
        for _ in range(80):
            y, friction = lugre_step(params, y, v, 40.0 / lam)
        results[label] = friction
    worst = max(abs(f - target) / target for f in results.values())
    announce(1, worst < 1e-3,
             f"steady friction at v=0.001 m/s: "
             f"{results['configured']:.4f} N (configured), "
             f"{results['tabulated']:.4f} N (tabulated values) "
             f"vs {target:.4f} N, worst rel err {worst:.2e} < 1e-3")


def test_criterion_2_convergence_margin_algebra(default_config):
    ghat = default_config.ilc_config().model_hat
    outcomes = {}
    for beta in (0.5, 0.9, 1.5, 2.1, 2.5):
        cfg = IlcConfig(model_hat=ghat, beta=beta)
        outcomes[beta] = check_monotonic_convergence(cfg, ghat).monotonic_ok
    ok = (outcomes[0.5] and outcomes[0.9] and outcomes[1.5]
          and not outcomes[2.1] and not outcomes[2.5])
    announce(2, ok, f"margin check per learning rate: {outcomes} "
                    "(expected pass below 2, fail above)")


def test_criterion_3_one_iteration_deadbeat(default_config):
    cfg = default_config.override("lugre.enabled", False)
    cfg = cfg.override("sensor.noise_variance", 0.0)
    cfg = cfg.override("pi.kp", 0.0)
    cfg = cfg.override("pi.ki", 0.0)
    cfg = cfg.override("qfilter.mode", "identity")
    cfg = cfg.override("ilc.beta", 1.0)
    cfg = cfg.override("reference.amplitude", 0.005)
    setup = cfg.simulation_setup()
    res = run_ilc_experiment(setup, RunMode.ILC,
                             single_segment_schedule(0.5, 2, amplitude=0.005),
                             keep_traces=True)
    spec = setup.sample
    adv = max(setup.ilc.effective_advance(), 5)
    interior = slice(adv, spec.n - adv)
    r, _ = generate_reference(ReferenceCommand(amplitude=0.005, frequency=0.5),
                              spec)
    e0 = np.linalg.norm((r.samples - res.traces[0].output)[interior])
    e1 = np.linalg.norm((r.samples - res.traces[1].output)[interior])
    ratio = e1 / e0
    announce(3, ratio < 1e-6,
             f"post-update error ratio {ratio:.2e} < 1e-6 "
             "(exact model, unit learning rate, no filtering)")


def test_criterion_4_single_task_compensation(single_task_run):
    result, elapsed = single_task_run
    m = result.mse_history
    steps = m[1:] / m[:-1]
    reduced = m[-1] <= 0.1 * m[0]
    monotone = bool(np.all(steps <= 1.05))
    ok = reduced and monotone and elapsed < 30.0
    announce(4, ok,
             f"0.5 Hz, 20 iterations: mse {m[0]:.3e} -> {m[-1]:.3e} "
             f"(ratio {m[-1] / m[0]:.3f} <= 0.1), worst step ratio "
             f"{steps.max():.3f} <= 1.05, runtime {elapsed:.1f}s < 30s")


def test_criterion_5_reference_switch_degrades_mse(default_setup):
    sched = TaskSchedule(segments=(
        Segment(command=ReferenceCommand(amplitude=0.05, frequency=0.5),
                iterations=10),
        Segment(command=ReferenceCommand(amplitude=0.05, frequency=0.6),
                iterations=3),
    ))
    res = run_ilc_experiment(default_setup, RunMode.ILC, sched,
                             keep_traces=False)
    m = res.mse_history
    jump = m[10] / m[9]
    announce(5, jump >= 2.0,
             f"switch 0.5->0.6 Hz at iteration 10: mse {m[9]:.3e} -> "
             f"{m[10]:.3e} ({jump:.1f}x >= 2x)")


def test_criterion_6_warm_start_accelerates_switches(default_setup,
                                                     corpus_and_model):
    t0 = time.time()
    sched = TaskSchedule(segments=tuple(
        Segment(command=ReferenceCommand(amplitude=0.05, frequency=f),
                iterations=10) for f in (0.6, 0.7, 0.8)))
    conventional = run_ilc_experiment(default_setup, RunMode.ILC, sched,
                                      keep_traces=False)
    augmented = run_ilc_experiment(default_setup, RunMode.ILC_WITH_NN, sched,
                                   nn=corpus_and_model["model"],
                                   keep_traces=False)
    t_exp = time.time() - t0
    mc, mn = conventional.mse_history, augmented.mse_history

    first_iter_better = [bool(mn[s] < mc[s]) for s in (10, 20)]
    fewer_iterations = []
    details = []
    for si, start in ((1, 10), (2, 20)):
        seg_c = mc[start:start + 10]
        seg_n = mn[start:start + 10]
        threshold = 1.2 * seg_c[-1]
        it_c = int(np.argmax(seg_c <= threshold))
        it_n = int(np.argmax(seg_n <= threshold))
        fewer_iterations.append(it_n < it_c)
        details.append(f"segment {si}: first-iter {mn[start]:.2e} vs "
                       f"{mc[start]:.2e}, iters-to-1.2x {it_n} vs {it_c}")
    total_time = (corpus_and_model["corpus_seconds"]
                  + corpus_and_model["train_seconds"] + t_exp)
    ok = all(first_iter_better) and all(fewer_iterations) and total_time < 300
    announce(6, ok, "; ".join(details) + f"; total runtime {total_time:.0f}s "
                                         "< 300s (corpus + training + runs)")


def test_criterion_7_kalman_beats_raw_measurement(default_config):
    cfg = default_config.override("lugre.enabled", False)
    setup = cfg.simulation_setup()
    cmd = ReferenceCommand(amplitude=0.05, frequency=0.5)
    r, _ = generate_reference(cmd, setup.sample)
    ff = Signal(setup.sample, np.zeros(setup.sample.n))
    wins = 0
    for seed in range(50):
        tr = run_trial(setup, r, ff, noise_seed=1000 + seed)
        rmse_est = np.sqrt(np.mean((tr.estimate - tr.output) ** 2))
        rmse_meas = np.sqrt(np.mean((tr.measurement - tr.output) ** 2))
        wins += rmse_est < rmse_meas
    announce(7, wins >= 48,
             f"estimate beats raw measurement in {wins}/50 seeded runs (>=48)")


def test_criterion_8_gradient_audit():
    checked = 0
    for seed in range(10):
        checked += finite_difference_audit(seed=seed, n_params=14,
                                           h=1e-6, rtol=1e-4)
    announce(8, checked >= 100,
             f"backprop vs central differences: {checked} parameters audited "
             "across 10 seeds at rel err < 1e-4")


def test_criterion_9_byte_identical_reruns(tmp_path):
    import yaml
    cfg_path = tmp_path / "exp.yaml"
    cfg_path.write_text(yaml.safe_dump({
        "schedule": [{"frequency": 0.6, "iterations": 2},
                     {"frequency": 0.7, "iterations": 2}],
    }))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["run-experiment", "--config", str(cfg_path),
                         "--out", str(out)]) == 0
        outs.append(out)
    files = sorted(os.listdir(outs[0]))
    assert files == sorted(os.listdir(outs[1]))
    identical = all(filecmp.cmp(outs[0] / f, outs[1] / f, shallow=False)
                    for f in files)
    announce(9, identical,
             f"two runs produced byte-identical outputs: {files}")


def test_criterion_10_learning_filter_facts():
    raw = build_q_filter(QFilterSpec(mode="tabulated", dc_normalize=False),
                         1000.0)
    dc_err = abs(raw.dc_gain() - 1.15)
    butter = build_q_filter(QFilterSpec(mode=MODE_BUTTERWORTH, order=4,
                                        cutoff_hz=70.0), 1000.0)
    h70 = abs(tf_freq_response(butter, 2 * np.pi * 70.0 / 1000.0))
    butter_err = abs(h70 - 1 / math.sqrt(2)) / (1 / math.sqrt(2))
    ok = dc_err < 1e-9 and butter_err < 0.01
    announce(10, ok,
             f"tabulated DC gain err {dc_err:.1e} < 1e-9; fourth-order 70 Hz "
             f"magnitude at cutoff {h70:.4f} within 1% of -3 dB")
