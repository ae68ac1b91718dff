import math

import pytest

from ulgfbp.config import RunConfig, load_config, parse_angle, parse_config_text
from ulgfbp.errors import ConfigError


@pytest.mark.parametrize("text,value", [
    ("pi", math.pi), ("pi/2", math.pi / 2), ("3*pi/4", 3 * math.pi / 4),
    ("2pi/8", math.pi / 4), ("0.5", 0.5), (" PI / 8 ", math.pi / 8),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_defaults():
    cfg = load_config()
    assert cfg == RunConfig()
    assert cfg.pipeline().feature_dim == 3186
    assert cfg.train().batch_size == 20 and cfg.train().learning_rate == 1e-4


def test_file_and_overrides(tmp_path, monkeypatch):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nseed = 4\nomegas = pi/2, pi/4, pi/8  # inline\n"
                 "lbp_mode = riu2\nepochs=2\n\n")
    cfg = load_config(p)
    assert cfg.seed == 4 and cfg.lbp_mode == "riu2" and cfg.epochs == 2
    assert cfg.pipeline().n_bins == 10
    assert load_config(p, {"seed": 9, "folds": None}).seed == 9
    monkeypatch.setenv("ULGFBP_SEED", "11")
    assert load_config().seed == 11
    assert load_config(p).seed == 4


@pytest.mark.parametrize("text", [
    "colour = red", "seed = x", "no equals sign", "lbp_mode = lbp", "folds = 1",
    "omegas = pi/2, pi/4", "lbp_radius = 3", "batch_size = 0", "knn_k = 0",
    "head_depth = 3", "jobs = -1", "resize_width = 2",
])
def test_invalid_config(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text + "\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_errors_carry_location():
    with pytest.raises(ConfigError, match="cfg:2"):
        parse_config_text("seed = 1\nbogus = 2\n", "cfg")


def test_missing_file_and_bad_env(tmp_path, monkeypatch):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
    monkeypatch.setenv("ULGFBP_SEED", "abc")
    with pytest.raises(ConfigError):
        load_config()
    with pytest.raises(ConfigError):
        load_config(overrides={"learning_rates": 1.0})
