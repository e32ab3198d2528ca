import argparse

import pytest

from rabisense.config import (
    InterferometerConfig,
    MonteCarloConfig,
    NoiseConfig,
    ScheduleConfig,
    SurfaceConfig,
)
from rabisense.core.casimir import ModeModel, detuning
from rabisense.engine.arg_utils import ExperimentArgs, load_experiment_args, parse_config
from rabisense.utils.errors import ConfigError


def _parse(argv):
    parser = ExperimentArgs.add_cli_args(argparse.ArgumentParser())
    return ExperimentArgs.from_cli_args(parser.parse_args(argv))


def test_defaults_are_valid():
    args = ExperimentArgs()
    assert args.num_particles == 2500
    params = args.to_params()
    assert "time" not in params
    assert params["temperatures"] == (0.0, 300.0, 600.0)


def test_invalid_values_name_their_key():
    with pytest.raises(ConfigError) as e:
        ExperimentArgs(gamma=0.6)
    assert e.value.key == "gamma"
    with pytest.raises(ConfigError):
        ExperimentArgs(variance_model="exact")


def test_parse_config_accepts_params_table():
    values = parse_config("[params]\nnum_particles = 100\nej_rate = 50\ntemperatures = [0, 300]\n")
    assert values == {"num_particles": 100, "ej_rate": 50.0, "temperatures": (0.0, 300.0)}


def test_parse_config_errors():
    with pytest.raises(ConfigError) as e:
        parse_config("colour = 3\n")
    assert e.value.key == "colour"
    with pytest.raises(ConfigError) as e:
        parse_config("num_particles = 2.5\n")
    assert e.value.key == "num_particles"
    with pytest.raises(ConfigError) as e:
        parse_config("num_particles = 10\nseed = = 3\n")
    assert e.value.lineno is not None
    with pytest.raises(ConfigError):
        parse_config("mc = 1\n")


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text("num_particles = 100\nseed = 5\n")
    args = _parse(["--config", str(config), "-N", "200"])
    assert args.num_particles == 200
    assert args.seed == 5
    assert args.ej_rate == 52.3
    assert load_experiment_args(str(config)).num_particles == 100


def test_empty_config_keeps_defaults(tmp_path):
    config = tmp_path / "empty.toml"
    config.write_text("")
    assert parse_config("") == {}
    args = load_experiment_args(str(config))
    assert args == ExperimentArgs()
    assert (args.num_particles, args.ej_rate, args.sigma_res, args.gamma) == (2500, 52.3, 40.0, 0.1)
    assert args.well_separation == pytest.approx(4.8e-6)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError) as e:
        _parse(["--config", str(tmp_path / "absent.toml")])
    assert e.value.key == "config"


def test_cli_lists_and_aliases():
    args = _parse(["--d", "5e-6", "--temperatures", "0", "77", "--mc", "-k", "4"])
    assert args.plate_distance == 5e-6
    assert args.temperatures == (0.0, 77.0)
    assert args.mc is True
    assert args.num_times == 4


def test_create_configs():
    interferometer, noise, schedule, surface, mc = ExperimentArgs(threads=2).create_configs()
    assert isinstance(interferometer, InterferometerConfig)
    assert noise.get_noise_model().sigma_res == 40.0
    p = interferometer.get_params()
    assert schedule.uniform(p).num_times == 10
    assert schedule.optimal_point(p).total_shots == 100
    assert mc.threads == 2
    setup = surface.get_setup(4e-6)
    assert setup.mode_model is ModeModel.GAUSSIAN
    assert detuning(setup) == pytest.approx(4.4, rel=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        InterferometerConfig(0, 52.3, 4.4)
    with pytest.raises(ValueError):
        NoiseConfig(40.0, 0.7)
    with pytest.raises(ValueError):
        ScheduleConfig(0, 1, 1)
    with pytest.raises(ValueError):
        SurfaceConfig(4.8e-6, 9.4, 47.3e-30, "lorentzian", 0.24e-6, 4.4, 4e-6)
    assert MonteCarloConfig(10, 0).threads >= 1
    point = SurfaceConfig(4.8e-6, 9.4, 47.3e-30, "point", 0.24e-6, 4.4, 4e-6)
    assert detuning(point.get_setup()) == pytest.approx(5.1396, rel=1e-4)
