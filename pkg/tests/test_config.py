"""Tests for layered settings and run-file parsing."""

import json
from pathlib import Path

import pytest

from bibkit.config import ConfigLoader, ConfigManager
from bibkit.core.exceptions import ConfigurationError
from bibkit.core.models import ExplorationPolicy, IBConfig, ThetaSource

REPO_CONFIG = Path(__file__).resolve().parent.parent / "config"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    import os

    for key in list(os.environ):
        if key.startswith("BIBKIT_"):
            monkeypatch.delenv(key)


def test_missing_defaults_file_gives_builtin_settings(tmp_path):
    settings = ConfigLoader(tmp_path).load_settings()
    assert settings.newton.max_iters == 200
    assert settings.inference.theta_source is ThetaSource.FIXED


def test_shipped_defaults_load():
    settings = ConfigManager(REPO_CONFIG).get_settings()
    assert settings.newton.coefficients == [-1.0, 0.0, 0.0, 1.0]
    assert settings.inference.theta == 0.36


def test_file_values(tmp_path):
    (tmp_path / "defaults.json").write_text(json.dumps({"partition": {"dilation_radius": 4}}))
    manager = ConfigManager(tmp_path)
    assert manager.get_partition().dilation_radius == 4
    assert manager.get_walker().min_runs == 30


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("BIBKIT_NEWTON_MAX_ITERS", "50")
    monkeypatch.setenv("BIBKIT_INFERENCE_POLICY", "add_hypothesis")
    manager = ConfigManager(tmp_path)
    assert manager.get_newton().max_iters == 50
    assert manager.get_inference().policy is ExplorationPolicy.ADD_HYPOTHESIS


def test_reload_picks_up_changes(tmp_path, monkeypatch):
    manager = ConfigManager(tmp_path)
    assert manager.get_perception().steps == 100_000
    monkeypatch.setenv("BIBKIT_PERCEPTION_STEPS", "10")
    assert manager.get_perception().steps == 100_000
    manager.reload_config()
    assert manager.get_perception().steps == 10


def test_invalid_values(tmp_path, monkeypatch):
    monkeypatch.setenv("BIBKIT_INFERENCE_GAMMA", "2.5")
    with pytest.raises(ConfigurationError) as info:
        ConfigLoader(tmp_path).load_settings()
    assert info.value.metadata["errors"]


def test_malformed_defaults(tmp_path):
    (tmp_path / "defaults.json").write_text("{not json")
    with pytest.raises(ConfigurationError):
        ConfigLoader(tmp_path).load_settings()


class TestRunFiles:
    def test_shipped_scenario(self):
        run = ConfigManager(REPO_CONFIG).load_run(REPO_CONFIG / "tri_stable.conf")
        assert run.mode == "bib"
        assert run.seed == 7
        assert run.stream == "ambiguous"
        assert run.ib.gamma == 0.01 and run.ib.theta == 0.36

    def test_tables_resolve_next_to_the_run_file(self):
        run = ConfigManager(REPO_CONFIG).load_run(REPO_CONFIG / "converging.conf")
        assert run.mode == "bayes"
        assert run.tables == REPO_CONFIG / "tri_stable_model.jsonl"
        assert run.tables.exists()

    def test_ib_keys_fall_back_to_the_base(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("steps = 50\nwindow = 4  # short memory\n")
        run = ConfigLoader(tmp_path).load_run_config(path, base=IBConfig(gamma=0.2))
        assert run.steps == 50
        assert run.ib.window == 4
        assert run.ib.gamma == 0.2

    def test_theta_alone_means_fixed(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text("theta = 0.1\n")
        base = IBConfig(theta_source=ThetaSource.PARTITION)
        run = ConfigLoader(tmp_path).load_run_config(path, base=base)
        assert run.ib.theta_source is ThetaSource.FIXED
        assert run.ib.theta == 0.1

    @pytest.mark.parametrize(
        "text",
        ["colour = red\n", "steps = many\n", "just a line\n", "stream = sideways\n"],
    )
    def test_bad_run_files(self, tmp_path, text):
        path = tmp_path / "run.conf"
        path.write_text(text)
        with pytest.raises(ConfigurationError):
            ConfigLoader(tmp_path).load_run_config(path)

    def test_missing_run_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ConfigLoader(tmp_path).load_run_config(tmp_path / "absent.conf")
