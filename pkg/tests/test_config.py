import numpy as np
import pytest

from nonmarkov.config import (
    DEFAULTS,
    figure_presets,
    load_config,
    parse_config_text,
    resolve_config,
    resolve_configs,
    save_default_config,
)
from nonmarkov.core.measures import Variant
from nonmarkov.core.spectral import FrequencyConvention
from nonmarkov.core.tcl_coefficients import TclOrder
from nonmarkov.models.errors import ConfigError


def test_figure_presets_match_published_parameters():
    a = resolve_config("1a").params
    assert (a.gamma0, a.omega0, a.lam, a.delta) == (1.0, 100.0, 0.2, 2.0)
    c = resolve_config("1c").params
    assert (c.lam, c.delta) == (400.0, 10.0)
    b = resolve_config("2b")
    assert (b.params.lam, b.params.delta, b.tmax) == (5.0, 50.0, 1.5)
    assert resolve_config("1d").params == a


def test_figure_four_has_three_sets():
    configs = resolve_configs("4")
    assert [c.label for c in configs] == ["4a", "4b", "4c"]
    assert [c.tmax for c in configs] == [10.0, 0.4, 0.005]
    with pytest.raises(ConfigError):
        resolve_config("4")


def test_unknown_figure():
    with pytest.raises(ConfigError):
        figure_presets("5z")


def test_parse_config_text():
    values = parse_config_text("# comment\n\nlambda = 0.5  # inline\norder = tcl2\nvariant=rwa\n")
    assert values == {"lambda": 0.5, "order": TclOrder.tcl2, "variant": Variant.rwa}
    with pytest.raises(ConfigError):
        parse_config_text("colour = blue")
    with pytest.raises(ConfigError):
        parse_config_text("grid = many")
    with pytest.raises(ConfigError):
        parse_config_text("just words")


def test_precedence(tmp_path, monkeypatch):
    config = tmp_path / "run.txt"
    config.write_text("lambda = 0.7\ndelta = 3.0\ngrid = 50\ntmax = 4.0\n")
    monkeypatch.setenv("NONMARKOV_DELTA", "4.0")
    cfg = resolve_config("1a", config_path=config, flags={"grid": 20})
    assert cfg.params.lam == 0.7  # file over preset
    assert cfg.params.delta == 4.0  # environment over file
    assert cfg.grid == 20  # flag over everything
    assert cfg.params.omega0 == 100.0  # preset over default
    assert cfg.label == "1a"


def test_defaults_without_figure():
    cfg = resolve_config()
    assert cfg.label == "custom"
    assert cfg.convention is FrequencyConvention.full
    assert cfg.grid == DEFAULTS["grid"]
    grid = cfg.time_grid
    assert grid[0] == 0.0 and grid[-1] == cfg.tmax and grid.size == 400
    assert np.all(np.diff(grid) > 0)


def test_validation():
    with pytest.raises(ConfigError):
        resolve_config(flags={"grid": 1})
    with pytest.raises(ConfigError):
        resolve_config(flags={"tmax": -1.0})
    with pytest.raises(ConfigError):
        resolve_config(flags={"lambda": 0.0})
    with pytest.raises(ConfigError):
        resolve_config(flags={"colour": "blue"})


def test_missing_explicit_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.txt")


def test_default_config_round_trip(isolated_config):
    path = save_default_config()
    assert path == isolated_config / "config.txt"
    assert parse_config_text(path.read_text()) == DEFAULTS
    with pytest.raises(ConfigError):
        save_default_config()
    save_default_config(force=True)
    assert resolve_config().as_dict()["grid"] == 400


@pytest.mark.parametrize("text", ["grid = 0", "grid = -5", "workers = 0", "max_order = -1"])
def test_non_positive_integers_are_rejected(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_max_order_auto(monkeypatch):
    assert parse_config_text("max_order = auto") == {"max_order": None}
    assert parse_config_text("max_order = 256") == {"max_order": 256}
    assert resolve_config().max_order is None
    assert resolve_config().as_dict()["max_order"] == "auto"
    monkeypatch.setenv("NONMARKOV_MAX_ORDER", "512")
    assert resolve_config().max_order == 512
    with pytest.raises(ConfigError):
        resolve_config(flags={"max_order": 1})
