import logging
import math

import pytest

from common.helper import configure_logging, ensure_dir, env_log_level, require_finite

@pytest.mark.parametrize("value, level", [
    ("off", logging.CRITICAL),
    ("INFO", logging.INFO),
    ("trace", logging.DEBUG),
    ("loud", logging.WARNING),
])
def test_env_log_level(monkeypatch, value, level):
    monkeypatch.setenv("DOCKMPC_LOG", value)
    assert env_log_level() == level

def test_env_log_level_unset(monkeypatch):
    monkeypatch.delenv("DOCKMPC_LOG", raising=False)
    assert env_log_level() == logging.WARNING

def test_verbose_flags_override(monkeypatch):
    monkeypatch.setenv("DOCKMPC_LOG", "off")
    assert configure_logging(verbose=1) == logging.INFO
    assert configure_logging(verbose=2) == logging.DEBUG
    monkeypatch.setenv("DOCKMPC_LOG", "trace")
    assert configure_logging(verbose=1) == logging.DEBUG

def test_ensure_dir(tmp_path):
    target = tmp_path / "a" / "b"
    assert ensure_dir(str(target)) == str(target)
    assert target.is_dir()
    ensure_dir(str(target))

def test_require_finite():
    assert require_finite(2, "x") == 2.0
    with pytest.raises(ValueError, match="x"):
        require_finite(math.inf, "x")
