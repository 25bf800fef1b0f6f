# tests/unit/cli/test_main.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

import configparser
import logging
from pathlib import Path

import pytest
from click.testing import CliRunner

from vibromirror.cli.main import LOG_DATE_FORMAT, LOG_FORMAT, configure_logging, resolve_config, simulate
from vibromirror.core.errors import ConfigurationError


def test_resolve_config_layers(tmp_path):
    """Preset, then file, then --set, then METHOD and --out."""
    path = tmp_path / "run.cfg"
    path.write_text("eps = 0.5\nQ = 3\n", encoding="utf-8")
    config = resolve_config("born", "fig4a", str(path), ("Q=5",), "x.json", "json")

    assert config.method.value == "born"
    assert config.epsilon == 0.5
    assert config.Q == 5.0
    assert config.out == "x.json"
    assert config.format.value == "json"


def test_resolve_config_needs_method():
    with pytest.raises(ConfigurationError, match="no method given"):
        resolve_config(None, None, None, ("Q=4.2",), None, None)
    assert resolve_config(None, None, None, ("method=units", "Q=4.2"), None, None).method.value == "units"


def test_list_presets():
    result = CliRunner().invoke(simulate, ["--list-presets"])
    assert result.exit_code == 0
    assert result.output.splitlines()[0].startswith("fig1 ")
    assert "cesium-units" in result.output


def test_show_config():
    result = CliRunner().invoke(simulate, ["semiclassical", "--set", "Q=4.2", "--show-config"])
    assert result.exit_code == 0
    assert "method = semiclassical" in result.output
    assert "Q = 4.2" in result.output


def test_unknown_preset_exits_with_config_code():
    result = CliRunner().invoke(simulate, ["--preset", "nope"])
    assert result.exit_code == 2
    assert "error: unknown preset 'nope'" in result.output


def test_bad_method_is_rejected_by_click():
    result = CliRunner().invoke(simulate, ["fourier"])
    assert result.exit_code == 2


def test_run_failure_exit_code(monkeypatch):
    from vibromirror.cli.runner import RunReport

    monkeypatch.setattr("vibromirror.cli.main.run", lambda config, jobs: RunReport(3, message="norm drift"))
    result = CliRunner().invoke(simulate, ["born", "--set", "Q=4.2"])
    assert result.exit_code == 3
    assert "error: norm drift" in result.output


def test_success_prints_paths(tmp_path):
    out = tmp_path / "born.csv"
    result = CliRunner().invoke(simulate, ["born", "-s", "Q=6", "-o", str(out)])
    assert result.exit_code == 0
    assert result.output.strip().splitlines()[-1] == str(out)
    assert out.exists()


@pytest.mark.parametrize("verbosity, level", [(0, logging.WARNING), (1, logging.INFO), (3, logging.DEBUG)])
def test_configure_logging_uses_the_test_log_layout(monkeypatch, verbosity, level):
    """The CLI formats records exactly as pytest's live log does."""
    calls = []
    monkeypatch.setattr(logging, "basicConfig", lambda **kwargs: calls.append(kwargs))
    configure_logging(verbosity)

    ini = configparser.ConfigParser(interpolation=None)
    ini.read(Path(__file__).resolve().parents[3] / "pytest.ini", encoding="utf-8")
    assert calls[0]["level"] == level
    assert calls[0]["format"] == LOG_FORMAT == ini["pytest"]["log_cli_format"]
    assert calls[0]["datefmt"] == LOG_DATE_FORMAT == ini["pytest"]["log_cli_date_format"]
