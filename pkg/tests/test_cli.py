import json

import pytest
from typer.testing import CliRunner

from nonmarkov import __version__
from nonmarkov.cli import app
from nonmarkov.output import read_csv

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, list(args))


def test_version():
    result = invoke("--version")
    assert result.exit_code == 0
    assert f"nonmarkov v{__version__}" in result.stdout


def test_config_init_and_show(isolated_config):
    result = invoke("config", "init")
    assert result.exit_code == 0
    assert json.loads(result.stdout)["config_file"] == str(isolated_config / "config.txt")
    assert invoke("config", "init").exit_code == 1

    (isolated_config / "config.txt").write_text("lambda = 0.9\n")
    shown = json.loads(invoke("config", "show").stdout)
    assert shown["lambda"] == 0.9
    assert shown["config_dir"] == str(isolated_config)
    assert len(json.loads(invoke("config", "show", "--figure", "4").stdout)) == 3


def test_unknown_figure_is_a_usage_error(tmp_path):
    result = invoke("coefficients", "--figure", "9z", "--out", str(tmp_path))
    assert result.exit_code == 1
    assert not list(tmp_path.iterdir())


def test_single_set_command_rejects_figure_four(tmp_path):
    assert invoke("coefficients", "--figure", "4", "--out", str(tmp_path)).exit_code == 1


def test_coefficients_second_order(tmp_path):
    result = invoke("coefficients", "--order", "tcl2", "--grid", "5", "--tmax", "0.5",
                    "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    summary = json.loads(result.stdout)
    assert summary["points"] == 5 and summary["flagged"] == []

    header, rows = read_csv(tmp_path / "coefficients_custom.csv")
    assert header[0] == "t" and len(rows) == 5
    for row in rows:
        for name in ("S+IV", "S-IV", "G-IV", "G+IV", "G0", "alphaIV", "betaIV"):
            assert float(row[name]) == 0.0
    assert float(rows[-1]["G-II"]) > 0


def test_rwa_measures_agree_between_figures(tmp_path):
    for figure in ("2a", "3a"):
        result = invoke("measures", "--figure", figure, "--variant", "rwa", "--grid", "60",
                        "--out", str(tmp_path))
        assert result.exit_code == 0, result.output
    sigma = json.loads((tmp_path / "measures_2a_rwa_intervals.json").read_text())
    g = json.loads((tmp_path / "measures_3a_rwa_intervals.json").read_text())
    assert g["idi"] == sigma["ibi"]


def test_positivity_summary(tmp_path):
    result = invoke("positivity", "--order", "tcl2", "--tmax", "5", "--grid", "11",
                    "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    summary = json.loads(result.stdout)
    assert summary["label"] == "custom"
    assert summary["violations"] == []
    assert (tmp_path / "positivity_custom.csv").is_file()


def test_trajectory(tmp_path):
    result = invoke("trajectory", "--rwa", "--figure", "2a", "--grid", "21", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    header, rows = read_csv(tmp_path / "rwa_2a.csv")
    assert header == ["t", "gamma", "Gamma_accum"] and len(rows) == 21

    result = invoke("trajectory", "--order", "tcl2", "--tmax", "1", "--grid", "6",
                    "--initial", "0,0,1", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    final = json.loads(result.stdout)["final"]
    assert 0 < final[2] < 1


@pytest.mark.parametrize("initial", ["1,0", "a,b,c", "1,1,1"])
def test_trajectory_rejects_bad_initial_state(tmp_path, initial):
    result = invoke("trajectory", "--order", "tcl2", "--tmax", "1", "--grid", "3",
                    "--initial", initial, "--out", str(tmp_path))
    assert result.exit_code == 1


def test_plot_empty_csv_writes_nothing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    result = invoke("plot", str(empty))
    assert result.exit_code == 1
    assert not (tmp_path / "empty.png").exists()


def test_plot_coefficients(tmp_path):
    invoke("coefficients", "--order", "tcl2", "--grid", "5", "--tmax", "0.5", "--out", str(tmp_path))
    source = tmp_path / "coefficients_custom.csv"
    result = invoke("plot", str(source))
    assert result.exit_code == 0, result.output
    assert (tmp_path / "coefficients_custom.png").stat().st_size > 0

    result = invoke("plot", str(source), "--columns", "alpha,beta", "--image", str(tmp_path / "d.png"))
    assert result.exit_code == 0, result.output
    assert invoke("plot", str(source), "--columns", "nope").exit_code == 1
