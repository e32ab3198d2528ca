import math

import pytest

from rabisense import config
from rabisense.engine.arg_utils import ExperimentArgs
from rabisense.engine.experiments import EXPERIMENTS, run_experiment
from rabisense.utils.io import RECORD_HEADER, RESULT_HEADER, write_csv


def test_every_subcommand_is_registered():
    assert set(EXPERIMENTS) == {
        "detuning", "sensitivity", "simulate", "fit", "fig1", "fig2a", "fig2b", "scaling", "crossover",
    }
    with pytest.raises(ValueError):
        run_experiment("fig3", ExperimentArgs())


def test_crossover():
    result = run_experiment("crossover", ExperimentArgs())
    assert result.summary["t_star_s"] == pytest.approx(2.7015, rel=1e-4)
    assert result.column("rabi_period_s")[0] == pytest.approx(0.119713, rel=1e-5)


def test_point_detuning_table():
    result = run_experiment("detuning", ExperimentArgs(mode_model="point"))
    assert result.header == ("d_m", "delta_0K_persec", "delta_300K_persec", "delta_600K_persec")
    d, zero_t, room, hot = result.rows[0]
    assert d == 4e-6
    assert zero_t == pytest.approx(5.1396, rel=1e-4)
    assert room == pytest.approx(2.6555, rel=1e-4)
    assert hot == pytest.approx(2 * room)
    assert result.metadata["mode_model"] == "point"


def test_fig1_uses_calibrated_modes():
    cfg = ExperimentArgs(d_grid=(4e-6, 6e-6), threads=1)
    result = run_experiment("fig1", cfg)
    assert result.header[-2:] == ("err_persec", "significance")
    assert result.column("delta_0K_persec")[0] == pytest.approx(4.4, rel=1e-8)
    assert result.column("significance")[0] > 2.0
    assert all(e > 0 for e in result.column("err_persec"))
    assert 0 < result.metadata["leakage"] < 0.5


def test_fig1_calibrates_once_across_threads(monkeypatch):
    calls = []
    calibrate = config.calibrate_modes

    def counting(*args, **kwargs):
        calls.append(args)
        return calibrate(*args, **kwargs)

    monkeypatch.setattr(config, "calibrate_modes", counting)
    cfg = ExperimentArgs(d_grid=(4e-6, 5e-6, 6e-6, 7e-6), threads=4)
    result = run_experiment("fig1", cfg)
    assert len(result.rows) == 4
    assert len(calls) == 1


def test_fig2a_flags_divergent_points():
    cfg = ExperimentArgs(num_particles=100, xi2_values=(1.0, 0.5), phase_points=11)
    result = run_experiment("fig2a", cfg)
    assert result.header == ("phase", "t_s", "rel_err_xi2_1", "rel_err_xi2_0.5", "divergent")
    assert len(result.rows) == 11
    first, last = result.rows[0], result.rows[-1]
    assert first[-1] is True and first[2] is None
    assert last[-1] is True
    assert result.rows[5][-1] is False
    minima = result.summary["minima"]
    assert [m["xi2"] for m in minima] == [1.0, 0.5]
    for m in minima:
        assert abs(m["min_phase"] - math.pi) < 0.5
        assert m["min_rel_err"] <= m["rel_err_at_pi"] * (1 + 1e-9)
    assert minima[1]["min_rel_err"] < minima[0]["min_rel_err"]


def test_fig2b_optimal_point_wins():
    cfg = ExperimentArgs(num_particles=400, xi2_grid=(0.1, 1.0))
    result = run_experiment("fig2b", cfg)
    for row in result.rows:
        assert 1.0 < row[result.header.index("uniform_over_optimal")] < 10.0
    assert result.column("sigma")[1] is None
    assert result.column("improvement_factor")[0] == pytest.approx(1 / math.sqrt(0.1))


def test_fig2a_minima_sit_at_half_period():
    result = run_experiment("fig2a", ExperimentArgs())
    minima = result.summary["minima"]
    assert [m["xi2"] for m in minima] == [1.0, 0.5, 0.017]
    for m in minima:
        assert abs(m["min_phase"] - math.pi) < 0.05
    at_pi = [m["rel_err_at_pi"] for m in minima]
    assert at_pi[0] > at_pi[1] > at_pi[2]
    assert at_pi[0] == pytest.approx(0.1197, abs=1e-3)


def test_fig2b_default_grid():
    result = run_experiment("fig2b", ExperimentArgs())
    ratio = result.column("uniform_over_optimal")
    assert all(1.0 < r < 10.0 for r in ratio)
    assert result.column("optimal_rel_err")[-1] == pytest.approx(0.0119, abs=1e-4)


def test_scaling_exponents():
    cfg = ExperimentArgs(particle_numbers=(100, 200, 400, 800, 1600), threads=1)
    result = run_experiment("scaling", cfg)
    assert result.summary["beta_css"] == pytest.approx(0.5, abs=1e-3)
    assert result.summary["beta_squeezed"] == pytest.approx(1.0, abs=0.05)
    assert result.column("e_over_n")[0] == pytest.approx(math.e / 100)


def test_sensitivity_protocols():
    cfg = ExperimentArgs(gamma=0.0, sigma_res=0.0)
    result = run_experiment("sensitivity", cfg)
    assert result.column("protocol") == ["single", "uniform", "optimal"]
    rel = dict(zip(result.column("protocol"), result.column("relative_err")))
    assert rel["single"] == pytest.approx(0.119705 / math.sqrt(10), rel=1e-5)
    assert rel["optimal"] == pytest.approx(0.0119705, rel=1e-5)
    assert rel["uniform"] > rel["optimal"]


def test_simulate_then_fit(tmp_path):
    cfg = ExperimentArgs(gamma=0.0, seed=11)
    simulated = run_experiment("simulate", cfg)
    assert simulated.header == RECORD_HEADER
    assert len(simulated.rows) == cfg.num_times
    path = write_csv(str(tmp_path / "record.csv"), simulated.header, simulated.rows)
    fitted = run_experiment("fit", ExperimentArgs(gamma=0.0, seed=11, record=path))
    assert fitted.header == RESULT_HEADER
    delta_est, delta_err = fitted.rows[0][:2]
    assert abs(delta_est - cfg.delta_rate) < 5 * delta_err
    again = run_experiment("fit", ExperimentArgs(gamma=0.0, seed=11))
    assert again.rows[0][0] == pytest.approx(delta_est, rel=1e-12)
