import os

import pytest
import toml

from rabisense import cli
from rabisense.engine.arg_utils import load_experiment_args
from rabisense.engine.experiments import EXPERIMENTS
from rabisense.utils.errors import QuadratureError


def test_crossover_writes_table_and_manifest(tmp_path, capsys):
    assert cli.dispatch(["crossover", "--output-dir", str(tmp_path)]) == 0
    assert "t* = 2.70 s" in capsys.readouterr().out
    csv_path = tmp_path / "crossover.csv"
    assert csv_path.read_text().startswith("t_star_s,omega_persec,alpha_rad,rabi_period_s\n")
    manifest = toml.load(str(tmp_path / "crossover.manifest.toml"))
    assert manifest["run"]["subcommand"] == "crossover"
    assert manifest["run"]["outputs"] == [str(csv_path)]
    assert manifest["metadata"]["t_star_s"] == pytest.approx(2.7015, rel=1e-4)


def test_manifest_reruns_as_config(tmp_path):
    assert cli.dispatch(["detuning", "--mode-model", "point", "--seed", "9", "--output-dir", str(tmp_path)]) == 0
    args = load_experiment_args(str(tmp_path / "detuning.manifest.toml"))
    assert args.mode_model == "point"
    assert args.seed == 9


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert cli.dispatch(["crossover"]) == 0
    assert os.path.exists(tmp_path / "env" / "crossover.csv")


def test_bad_values_exit_with_config_code(tmp_path):
    assert cli.dispatch(["crossover", "--gamma", "0.9", "--output-dir", str(tmp_path)]) == cli.EXIT_CONFIG
    config = tmp_path / "bad.toml"
    config.write_text("colour = 1\n")
    assert cli.dispatch(["crossover", "--config", str(config), "--output-dir", str(tmp_path)]) == cli.EXIT_CONFIG


def test_usage_errors():
    assert cli.dispatch(["fig3"]) == 2
    assert cli.dispatch([]) == 2
    assert cli.dispatch(["--version"]) == 0


def test_numerical_failures_exit_with_code_3(tmp_path, monkeypatch):
    def fail(name, cfg):
        raise QuadratureError("no convergence")

    monkeypatch.setattr(cli, "run_experiment", fail)
    assert cli.dispatch(["fig1", "--output-dir", str(tmp_path)]) == cli.EXIT_NUMERICAL


@pytest.mark.parametrize("subcommand", sorted(EXPERIMENTS))
def test_help_on_every_subcommand(subcommand, capsys):
    assert cli.dispatch([subcommand, "--help"]) == 0
    assert subcommand in capsys.readouterr().out
