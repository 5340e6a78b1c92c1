"""
Tests for structured logging.

Covers:
- setup_logging with settings defaults and explicit overrides
- Field names that shadow logging parameters
- JSON records carry bound fields and numpy values
"""

import json
import logging

import numpy as np
import pytest

from salnet.shared.logger import get_logger, setup_logging


@pytest.fixture(autouse=True)
def restore_root_logger(monkeypatch):
    monkeypatch.setenv("SALNET_LOG_FILE_ENABLED", "false")
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def _records(err: str):
    return [json.loads(line) for line in err.splitlines() if line.startswith("{")]


def test_setup_logging_runs_with_defaults():
    setup_logging()
    setup_logging(level="DEBUG")
    assert logging.getLogger().level == logging.DEBUG


def test_json_records_carry_fields(capsys):
    setup_logging(level="DEBUG", json_format=True)
    log = get_logger("salnet.test").bind(run_id="r1")
    log.info("episode finished", episode=np.int64(3), loss=np.float64(0.25))
    records = _records(capsys.readouterr().err)
    configured = [r for r in records if r["msg"] == "logging configured"]
    assert configured and configured[0]["log_level"] == "DEBUG"
    record = next(r for r in records if r["msg"] == "episode finished")
    assert record["run_id"] == "r1"
    assert record["episode"] == 3 and record["loss"] == 0.25


def test_fields_may_shadow_logging_parameters(capsys):
    setup_logging(level="INFO", json_format=True)
    get_logger("salnet.test").warning("odd names", level="high", message="m")
    record = next(r for r in _records(capsys.readouterr().err) if r["msg"] == "odd names")
    assert record["message"] == "m"


def test_child_does_not_leak_fields():
    parent = get_logger("salnet.test").bind(seed=0)
    child = parent.child(variant="Inter.-Hal.")
    assert child.fields == {"seed": 0, "variant": "Inter.-Hal."}
    assert parent.fields == {"seed": 0}
