"""
Experiment config parsing
"""
import json
import re
from pathlib import Path

import pytest
import yaml

from src.utils.config_utils import ExperimentConfig, config_from_dict, load_config, read_config_file
from src.utils.errors import ConfigError

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "config" / "config.yaml"

SAMPLE = {
    "seed": 3,
    "schedule": {"initial_train_days": 60, "refit_days": 30, "val_days": 10, "horizon_hours": 24},
    "objective": {"quantiles": [0.1, 0.5, 0.9], "weights": [2.0, 1.0, 2.0], "h_star": 12},
    "features": {"horizon_hours": 24, "weather": ["temperature"], "lags": {"temperature": 3},
                 "btm": {"enabled": False}},
    "report": {"formats": ["json"]},
}

SAMPLE_TOML = """
seed = 3

[schedule]
initial_train_days = 60
refit_days = 30
val_days = 10
horizon_hours = 24

[objective]
quantiles = [0.1, 0.5, 0.9]
weights = [2.0, 1.0, 2.0]
h_star = 12

[features]
horizon_hours = 24
weather = ["temperature"]

[features.lags]
temperature = 3

[features.btm]
enabled = false

[report]
formats = ["json"]
"""


def test_shipped_config_parses():
    config = load_config(str(DEFAULT_CONFIG))
    assert config.seed == 7
    assert config.objective.weights == (4.0, 1.0, 4.0)
    assert set(config.forecaster.variants) == {"default", "pinball_only"}
    assert config.features.settings.weather == ("temperature", "ghi", "humidity", "wind_speed")
    assert re.fullmatch(r"[0-9a-f]{12}", config.config_hash())


def test_defaults_without_file():
    config = ExperimentConfig()
    assert config.schedule.initial_train_days == 180
    assert config.objective.quantiles == (0.025, 0.5, 0.975)
    with pytest.raises(ConfigError):
        config.require_seed()


def test_formats_agree(tmp_path):
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(SAMPLE))
    (tmp_path / "c.json").write_text(json.dumps(SAMPLE))
    (tmp_path / "c.toml").write_text(SAMPLE_TOML)
    hashes = {load_config(str(tmp_path / name)).config_hash() for name in ("c.yaml", "c.json", "c.toml")}
    assert len(hashes) == 1


def test_parsed_sections():
    config = config_from_dict(SAMPLE)
    assert config.schedule.refit_days == 30
    assert config.objective.point_level == 0.5
    assert config.features.lags == {"temperature": 3}
    assert config.features.settings.horizon_hours == 24
    assert config.report.formats == ("json",)
    settings = config.report.settings(config.objective.h_star)
    assert settings.h_star == 12


def test_hash_tracks_content():
    a = config_from_dict(SAMPLE)
    b = config_from_dict(dict(SAMPLE, seed=4))
    assert a.config_hash() == config_from_dict(json.loads(json.dumps(SAMPLE))).config_hash()
    assert a.config_hash() != b.config_hash()


@pytest.mark.parametrize("raw, dotted", [
    ({"schedule": {"refit_day": 30}}, "config.schedule.refit_day"),
    ({"features": {"btm": {"capacity": 1.0}}}, "config.features.btm.capacity"),
    ({"colour": "red"}, "config.colour"),
])
def test_unknown_keys_name_their_path(raw, dotted):
    with pytest.raises(ConfigError) as info:
        config_from_dict(raw)
    assert dotted in info.value.message


def test_unknown_objective_key():
    with pytest.raises(ConfigError):
        config_from_dict({"objective": {"lambda": 1.0}})


@pytest.mark.parametrize("raw", [
    {"objective": {"weights": [1.0, 1.0]}},
    {"objective": {"pi_max": 1.5}},
    {"schedule": {"stride_hours": 0}},
    {"schedule": {"stride_hours": "daily"}},
    {"report": {"reserve_leads": "some"}},
    {"features": {"weather": ["sunshine"]}},
    {"data": "load.csv"},
])
def test_invalid_values(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_missing_and_unsupported_files(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "absent.yaml"))
    (tmp_path / "c.ini").write_text("[x]\n")
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "c.ini"))
    (tmp_path / "broken.yaml").write_text("seed: [1\n")
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "broken.yaml"))
