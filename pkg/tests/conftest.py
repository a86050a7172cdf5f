"""Shared fixtures. The heavy artifacts (converged single-task run, training
corpus, trained effort estimator) are built once per session and reused by
the scenario tests and the acceptance suite."""

import pytest

from ilcsim import (ExperimentConfig, ReferenceCommand, RunMode, Segment,
                    TaskSchedule, build_training_corpus, fit,
                    run_ilc_experiment)
from ilcsim.neural import AdamState, MlpModel

ACCEPTANCE_CORPUS_FREQS = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85]


@pytest.fixture()
def default_config():
    return ExperimentConfig.defaults()


@pytest.fixture()
def default_setup(default_config):
    return default_config.simulation_setup()


@pytest.fixture()
def frictionless_setup(default_config):
    cfg = default_config.override("lugre.enabled", False)
    return cfg.simulation_setup()


def single_segment_schedule(frequency, iterations, amplitude=0.05):
    return TaskSchedule(segments=(
        Segment(command=ReferenceCommand(amplitude=amplitude, frequency=frequency),
                iterations=iterations),))


@pytest.fixture(scope="session")
def single_task_run():
    """Criterion-4 style run: 0.5 Hz, 20 learning iterations, friction on."""
    import time
    setup = ExperimentConfig.defaults().simulation_setup()
    t0 = time.time()
    result = run_ilc_experiment(setup, RunMode.ILC,
                                single_segment_schedule(0.5, 20),
                                keep_traces=True)
    return result, time.time() - t0


@pytest.fixture(scope="session")
def corpus_and_model():
    """Reduced-grid corpus plus a trained effort estimator (shared by the
    warm-start tests and acceptance criterion 6)."""
    import time
    cfg = ExperimentConfig.defaults()
    setup = cfg.simulation_setup()
    t0 = time.time()
    data, meta = build_training_corpus(setup, ACCEPTANCE_CORPUS_FREQS,
                                       amplitude=0.05, iterations_per_freq=20)
    t_corpus = time.time() - t0
    tr = cfg.data["training"]
    model = MlpModel.initialize(seed=int(tr["init_seed"]))
    opt = AdamState.for_model(model, lr=float(tr["learning_rate"]))
    t0 = time.time()
    model, losses = fit(model, data, cfg.train_spec(), opt=opt)
    t_train = time.time() - t0
    return {"data": data, "meta": meta, "model": model, "losses": losses,
            "corpus_seconds": t_corpus, "train_seconds": t_train}
