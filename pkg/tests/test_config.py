"""Config consistency checks."""

import pytest

import config


def test_shipped_config_is_valid():
    assert config.validate_config() is True


def test_tail_window_larger_than_powers(monkeypatch):
    monkeypatch.setitem(config.ESTIMATOR_CONFIG, "tail_window", config.ESTIMATOR_CONFIG["powers"] + 1)
    with pytest.raises(ValueError, match="tail_window"):
        config.validate_config()


def test_levels_must_increase(monkeypatch):
    monkeypatch.setitem(config.ESTIMATOR_CONFIG, "levels", [0.99, 0.9])
    with pytest.raises(ValueError, match="levels"):
        config.validate_config()
