import numpy as np
import pytest
import yaml

from ilcsim.config import DEFAULTS, ExperimentConfig, default_config_yaml
from ilcsim.errors import ConfigError


def test_default_yaml_template_matches_defaults():
    parsed = yaml.safe_load(default_config_yaml())
    assert ExperimentConfig.from_dict(parsed).data == DEFAULTS


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        ExperimentConfig.from_dict({"plantt": {}})


def test_unknown_nested_key_rejected_with_path():
    with pytest.raises(ConfigError, match="lugre"):
        ExperimentConfig.from_dict({"lugre": {"sigma3": 1.0}})


def test_partial_override_keeps_other_defaults():
    cfg = ExperimentConfig.from_dict({"plant": {"M": 0.7}})
    assert cfg.data["plant"]["M"] == 0.7
    assert cfg.data["plant"]["Ks"] == DEFAULTS["plant"]["Ks"]


def test_dotted_override():
    cfg = ExperimentConfig.defaults().override("ilc.beta", 1.2)
    assert cfg.data["ilc"]["beta"] == 1.2
    with pytest.raises(ConfigError):
        ExperimentConfig.defaults().override("ilc.gamma", 1.0)


def test_mode_and_schedule_resolution():
    cfg = ExperimentConfig.from_dict({
        "schedule": [{"frequency": 0.6, "iterations": 10},
                     {"frequency": 0.7, "iterations": 10, "amplitude": 0.03}],
    })
    sched = cfg.schedule()
    assert len(sched.segments) == 2
    assert sched.segments[0].command.amplitude == 0.05
    assert sched.segments[1].command.amplitude == 0.03
    assert sched.total_iterations == 20


def test_schedule_rejects_unknown_keys():
    cfg = ExperimentConfig.from_dict({
        "schedule": [{"frequency": 0.6, "iterations": 1, "color": "red"}]})
    with pytest.raises(ConfigError):
        cfg.schedule()


def test_corpus_grid_and_exclusions():
    cfg = ExperimentConfig.from_dict({
        "corpus": {"f_min": 0.5, "f_max": 0.9, "count": 5,
                   "exclude_frequencies": [0.7]}})
    freqs = cfg.corpus_frequencies()
    assert freqs == [0.5, 0.6, 0.8, 0.9]
    explicit = ExperimentConfig.from_dict({
        "corpus": {"frequencies": [0.61, 0.72]}})
    assert explicit.corpus_frequencies() == [0.61, 0.72]


def test_default_corpus_grid_has_thirty_points():
    freqs = ExperimentConfig.defaults().corpus_frequencies()
    assert len(freqs) == 30
    assert freqs[0] == 0.5 and freqs[-1] == 0.9


def test_resolved_objects_carry_design_values():
    cfg = ExperimentConfig.defaults()
    setup = cfg.simulation_setup()
    assert setup.sample.dt == 0.001 and setup.sample.n == 6000
    assert setup.plant.u_max == 1.5
    assert setup.pi_kp == 0.12 and setup.pi_ki == 0.5e-3
    assert np.allclose(setup.kalman.qcov, np.diag([1e-5, 1e4]))
    assert setup.kalman.r == 1.0
    assert setup.ilc.beta == 0.9
    assert cfg.lugre_params().Fc == 40.0
    assert cfg.lugre_params().Fs == 60.0
    assert cfg.lugre_params().vs == 0.001


def test_lugre_disabled_resolves_to_none():
    cfg = ExperimentConfig.defaults().override("lugre.enabled", False)
    assert cfg.lugre_params() is None
    assert cfg.simulation_setup().lugre is None


def test_load_reports_parse_position(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("plant:\n  M: [unclosed\n")
    with pytest.raises(ConfigError, match="line"):
        ExperimentConfig.load(bad)
