import numpy as np
import pytest

from adrom.driver import (
    ExperimentConfig,
    acceleration,
    make_problem,
    relative_error,
    run_adaptive_rom,
    run_fom,
    run_static_rom,
)
from adrom.tracking import UpdateRule


def burgers_config(**kw):
    base = dict(model="burgers", n_elem=64, nu=0.01, dt=1e-3, n_t=60,
                r=4, n_s=4, w_init=4, z=10, projection="lspg",
                sampling="qdeim", mode="adaptive",
                rule=UpdateRule("isvd", lam=0.1))
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def burgers_truth():
    return run_fom(burgers_config(mode="fom"))


class TestRelativeError:
    def test_exact(self):
        q = np.array([1.0, 2.0])
        assert relative_error(q, q) == 0.0

    def test_double(self):
        q = np.array([3.0, 4.0])
        assert np.isclose(relative_error(2.0 * q, q), 1.0)

    def test_unit_direction_perturbation(self):
        truth = np.ones(16)
        pred = truth.copy()
        pred[0] += np.linalg.norm(truth)
        assert np.isclose(relative_error(pred, truth), 1.0)

    def test_zero_reference_falls_back_to_absolute(self):
        assert np.isclose(relative_error(np.array([0.3, 0.4]), np.zeros(2)), 0.5)


class TestAcceleration:
    def test_equal_times(self):
        assert acceleration(2.0, 2.0) == 1.0

    def test_reported_values(self):
        assert np.isclose(acceleration(1.806, 0.404), 4.47, atol=5e-3)
        assert np.isclose(acceleration(6.126, 1.236), 4.96, atol=5e-3)

    def test_positive_denominator(self):
        with pytest.raises(ValueError):
            acceleration(1.0, 0.0)


class TestRunFom:
    def test_degenerate_horizon_is_training_window(self):
        res = run_fom(burgers_config(mode="fom", n_t=4, w_init=4))
        assert res.trajectory.shape == (5, 64)

    def test_gaussian_advects_and_decays(self, burgers_truth):
        traj = burgers_truth.trajectory
        assert np.argmax(traj[-1]) > np.argmax(traj[0])
        assert traj[-1].max() < traj[0].max()
        assert not burgers_truth.newton_failures

    def test_sod_wave_structure(self):
        cfg = ExperimentConfig(model="sod", n_elem=64, dt=2.5e-4, n_t=80,
                               mode="fom", r=4, n_s=4, w_init=4)
        res = run_fom(cfg)
        model = make_problem(cfg)
        fields = model.primitive_fields(res.trajectory[-1])
        # shock moves right, expansion moves left, velocity plateau is positive
        assert fields["v"].max() > 0.5
        assert fields["rho"][0] == pytest.approx(1.0, abs=1e-3)
        assert fields["rho"][-1] == pytest.approx(0.125, abs=1e-3)
        mid = fields["rho"][20:44]
        assert mid.max() < 1.0 and mid.min() > 0.125


class TestRunStaticRom:
    def test_full_rank_reduction_tracks_fom(self):
        # dt large enough that w_init = N steps excite N independent modes
        n = 8
        cfg = burgers_config(mode="static", n_elem=n, r=n, n_s=n, w_init=n,
                             n_t=20, dt=0.05)
        truth = run_fom(burgers_config(mode="fom", n_elem=n, n_t=20, dt=0.05,
                                       w_init=n, r=n, n_s=n))
        res = run_static_rom(cfg, truth=truth.trajectory)
        assert res.errors is not None
        assert res.errors.max() <= 1e-6

    def test_reduced_static_error_grows(self, burgers_truth):
        res = run_static_rom(burgers_config(mode="static"),
                             truth=burgers_truth.trajectory)
        early = res.errors[:5, 0].mean()
        late = res.errors[-5:, 0].mean()
        assert late > early

    def test_no_events_logged(self, burgers_truth):
        res = run_static_rom(burgers_config(mode="static"),
                             truth=burgers_truth.trajectory)
        assert res.event_log == []


class TestRunAdaptiveRom:
    def test_event_count(self, burgers_truth):
        for z, n_t in [(10, 60), (7, 60), (25, 60)]:
            res = run_adaptive_rom(burgers_config(z=z, n_t=n_t),
                                   truth=burgers_truth.trajectory[: n_t + 1])
            assert len(res.event_log) == (n_t - 4) // z

    def test_huge_z_reduces_to_static(self, burgers_truth):
        static = run_static_rom(burgers_config(mode="static"),
                                truth=burgers_truth.trajectory)
        adaptive = run_adaptive_rom(burgers_config(z=100),
                                    truth=burgers_truth.trajectory)
        assert len(adaptive.event_log) == 0
        assert np.array_equal(static.trajectory, adaptive.trajectory)

    def test_signal_trajectory_is_rule_independent(self, burgers_truth):
        runs = [run_adaptive_rom(burgers_config(rule=rule),
                                 truth=burgers_truth.trajectory)
                for rule in (UpdateRule("isvd", lam=0.1),
                             UpdateRule("onestep"),
                             UpdateRule("direct", window=4))]
        for other in runs[1:]:
            assert np.array_equal(runs[0].signal_steps, other.signal_steps)
            assert np.array_equal(runs[0].signal_errors, other.signal_errors)

    def test_adaptive_beats_static(self, burgers_truth):
        static = run_static_rom(burgers_config(mode="static"),
                                truth=burgers_truth.trajectory)
        adaptive = run_adaptive_rom(burgers_config(),
                                    truth=burgers_truth.trajectory)
        assert adaptive.time_averaged_error("u") < static.time_averaged_error("u")

    @pytest.mark.parametrize("kind", ["isvd", "wsvd", "direct", "onestep", "oja", "grouse"])
    def test_all_rules_complete(self, kind, burgers_truth):
        rule = UpdateRule(kind, lam=0.1, window=4, eta=0.01)
        res = run_adaptive_rom(burgers_config(rule=rule),
                               truth=burgers_truth.trajectory)
        assert np.all(np.isfinite(res.trajectory))
        assert len(res.event_log) == 5
        assert all("update_error" not in e for e in res.event_log)

    def test_galerkin_projection_runs(self, burgers_truth):
        res = run_adaptive_rom(burgers_config(projection="galerkin"),
                               truth=burgers_truth.trajectory)
        assert np.all(np.isfinite(res.trajectory))

    def test_every_step_cadence_runs(self, burgers_truth):
        res = run_adaptive_rom(burgers_config(rule=UpdateRule("direct", window=4),
                                              cadence="every-step"),
                               truth=burgers_truth.trajectory)
        assert np.all(np.isfinite(res.trajectory))
        assert len(res.event_log) == 5

    def test_sod_fgs_adaptive_runs(self):
        cfg = ExperimentConfig(model="sod", n_elem=64, dt=2.5e-4, n_t=40,
                               r=4, n_s=6, w_init=4, z=10, sampling="fgs",
                               feature="pressure-gradient", n_extra=2,
                               rule=UpdateRule("isvd", lam=0.1))
        truth = run_fom(ExperimentConfig(model="sod", n_elem=64, dt=2.5e-4,
                                         n_t=40, mode="fom", r=4, n_s=4, w_init=4))
        res = run_adaptive_rom(cfg, truth=truth.trajectory)
        assert np.all(np.isfinite(res.trajectory))
        assert res.errors.shape[1] == 3


class TestConfigValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            burgers_config(model="advection")
        with pytest.raises(ValueError):
            burgers_config(w_init=2, r=4)
        with pytest.raises(ValueError):
            burgers_config(n_s=2, r=4)
        with pytest.raises(ValueError):
            burgers_config(z=0)
        with pytest.raises(ValueError):
            burgers_config(projection="petrov")

    def test_event_count_property(self):
        assert burgers_config(n_t=500, w_init=4, z=10).n_events == 49
