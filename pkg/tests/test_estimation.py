import numpy as np
import pytest

from ilcsim.estimation import (KalmanConfig, KalmanState, kalman_filter_signal,
                               kalman_step)
from ilcsim.plant import PlantParams
from ilcsim.signals import SampleSpec, Signal, c2d_zoh

DT = 1e-3
PLANT = PlantParams()
MODEL = c2d_zoh(PLANT.M, PLANT.C, PLANT.Ks, PLANT.gain, DT)


def table_config(**overrides):
    kw = dict(model=MODEL, qcov=np.diag([1e-5, 1e4]), r=1.0,
              x0=np.zeros(2), p0=np.zeros((2, 2)))
    kw.update(overrides)
    return KalmanConfig(**kw)


def simulate_linear(u_seq, noise, x0=np.zeros(2)):
    """True linear plant trajectory plus its noisy measurements."""
    n = len(u_seq)
    x = x0.copy()
    truth = np.empty(n)
    for k in range(n):
        truth[k] = x[0]
        x = MODEL.A @ x + MODEL.B[:, 0] * u_seq[k]
    return truth, truth + noise


class TestKalmanStep:
    def test_measurement_ignored_when_worthless(self):
        # zero process noise, huge measurement noise, perfect prior
        cfg = table_config(qcov=np.zeros((2, 2)), r=1e12,
                           x0=np.array([0.01, 0.0]),
                           p0=np.zeros((2, 2)))
        st = cfg.initial_state()
        x_model = cfg.x0.copy()
        for k in range(200):
            x_model = MODEL.A @ x_model + MODEL.B[:, 0] * 0.3
            st = kalman_step(cfg, st, 0.3, z=123.456)
        assert np.abs(st.x_hat - x_model).max() < 1e-6

    def test_measurement_trusted_when_perfect(self):
        cfg = table_config(r=1e-15, p0=np.eye(2))
        st = KalmanState(x_hat=np.array([5.0, 0.0]), P=np.eye(2))
        st = kalman_step(cfg, st, 0.0, z=0.777)
        assert st.x_hat[0] == pytest.approx(0.777, abs=1e-9)

    def test_covariance_stays_symmetric(self):
        cfg = table_config()
        st = cfg.initial_state()
        for k in range(100):
            st = kalman_step(cfg, st, 0.1, z=0.01 * k)
            assert np.array_equal(st.P, st.P.T)
            assert st.P[0, 0] >= 0 and st.P[1, 1] >= 0


class TestFilterSignal:
    def test_exact_model_zero_noise_recovers_truth(self):
        spec = SampleSpec(dt=DT, n=2000)
        rng = np.random.default_rng(0)
        u = rng.uniform(-1, 1, spec.n)
        truth, meas = simulate_linear(u, np.zeros(spec.n))
        est = kalman_filter_signal(table_config(), Signal(spec, u),
                                   Signal(spec, meas))
        assert np.abs(est.samples - truth).max() < 1e-9

    def test_single_sample(self):
        spec = SampleSpec(dt=DT, n=1)
        est = kalman_filter_signal(table_config(), Signal(spec, np.zeros(1)),
                                   Signal(spec, np.array([0.01])))
        assert est.spec.n == 1

    def test_constant_bias_attenuated(self):
        spec = SampleSpec(dt=DT, n=6000)
        bias = 1e-3
        u = np.zeros(spec.n)
        truth, meas = simulate_linear(u, np.full(spec.n, bias))
        est = kalman_filter_signal(table_config(), Signal(spec, u),
                                   Signal(spec, meas))
        steady = est.samples[-500:].mean()
        assert 0 < steady < bias

    def test_estimate_beats_raw_measurement(self):
        spec = SampleSpec(dt=DT, n=6000)
        rng = np.random.default_rng(7)
        t = spec.times()
        u = 0.5 * np.sin(2 * np.pi * 0.5 * t)
        noise = rng.standard_normal(spec.n) * 1e-4
        truth, meas = simulate_linear(u, noise)
        est = kalman_filter_signal(table_config(), Signal(spec, u),
                                   Signal(spec, meas))
        rmse_est = np.sqrt(np.mean((est.samples - truth) ** 2))
        rmse_meas = np.sqrt(np.mean((meas - truth) ** 2))
        assert rmse_est < rmse_meas


class TestInvariants:
    def test_riccati_fixed_point_within_trial(self):
        cfg = table_config()
        st = cfg.initial_state()
        prev = st.P.copy()
        converged_at = None
        for k in range(6000):
            st = kalman_step(cfg, st, 0.0, 0.0)
            if np.abs(st.P - prev).max() < 1e-12:
                converged_at = k
                break
            prev = st.P.copy()
        assert converged_at is not None

    def test_unbiased_on_linear_plant(self):
        spec = SampleSpec(dt=DT, n=1500)
        t = spec.times()
        u = 0.4 * np.sin(2 * np.pi * 0.7 * t)
        sigma = 1e-4
        errs = []
        for seed in range(100):
            noise = np.random.default_rng(seed).standard_normal(spec.n) * sigma
            truth, meas = simulate_linear(u, noise)
            est = kalman_filter_signal(table_config(), Signal(spec, u),
                                       Signal(spec, meas))
            errs.append(np.mean(est.samples - truth))
        errs = np.array(errs)
        se = errs.std(ddof=1) / np.sqrt(len(errs))
        assert abs(errs.mean()) < 3 * se + 1e-15

    def test_joseph_update_keeps_covariance_psd(self):
        rng = np.random.default_rng(123)
        total_steps = 200_000
        chains = 20
        per_chain = total_steps // chains
        for c in range(chains):
            q = np.diag(rng.uniform(1e-8, 1e2, 2))
            cfg = table_config(qcov=q, r=float(rng.uniform(1e-6, 1e2)),
                               p0=np.diag(rng.uniform(0, 1e2, 2)))
            st = cfg.initial_state()
            zs = rng.standard_normal(per_chain)
            us = rng.standard_normal(per_chain)
            for k in range(per_chain):
                st = kalman_step(cfg, st, us[k], zs[k])
                p = st.P
                tr = p[0, 0] + p[1, 1]
                mineig = 0.5 * (tr - np.hypot(p[0, 0] - p[1, 1], 2 * p[0, 1]))
                assert mineig >= -1e-12 * max(tr, 1.0)

    def test_rejects_bad_covariances(self):
        with pytest.raises(ValueError):
            table_config(r=0.0)
        with pytest.raises(ValueError):
            table_config(qcov=np.array([[1.0, 2.0], [2.0, 1.0]]))
