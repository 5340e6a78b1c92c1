"""
Structured logging.

JSON output for machine consumption, rich console output for people, and
context binding so a training run tags every record with its run id,
variant and seed.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from functools import partialmethod
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from salnet.config.base import LoggingSettings

console = Console(stderr=True)

_FIELDS = "fields"


def _plain(value: Any) -> Any:
    """Numpy scalars and arrays become JSON-native values; paths become strings."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def _fields(record: logging.LogRecord) -> Dict[str, Any]:
    return getattr(record, _FIELDS, None) or {}


class JSONFormatter(logging.Formatter):
    """One JSON object per record: time, level, logger, message, then bound fields."""

    def format(self, record: logging.LogRecord) -> str:
        payload: Dict[str, Any] = {
            "ts": datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
            **_fields(record),
        }
        if record.exc_info:
            payload["traceback"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False, default=_plain)


class ContextFormatter(logging.Formatter):
    """Message followed by ``key=value`` fields; floats are shortened for the console."""

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        fields = _fields(record)
        if not fields:
            return text
        rendered = (f"{k}={v:.4g}" if isinstance(v, (float, np.floating)) else f"{k}={v}" for k, v in fields.items())
        return f"{text} | {' '.join(rendered)}"


class StructuredLogger:
    """
    Logger wrapper carrying bound fields.

    Examples:
        >>> log = get_logger(__name__).bind(run_id="a1b2", variant="Inter.-Hal.")
        >>> log.info("Episode finished", episode=100, loss=0.21)
    """

    def __init__(self, name: str, fields: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(name)
        self.fields: Dict[str, Any] = dict(fields or {})

    def bind(self, **fields: Any) -> "StructuredLogger":
        self.fields.update(fields)
        return self

    def unbind(self, *names: str) -> "StructuredLogger":
        for name in names:
            self.fields.pop(name, None)
        return self

    def child(self, **fields: Any) -> "StructuredLogger":
        """Independent logger with this one's fields plus ``fields``."""
        return StructuredLogger(self.logger.name, {**self.fields, **fields})

    def log(self, level: int, message: str, /, exc: Optional[BaseException] = None, **fields: Any) -> None:
        if not self.logger.isEnabledFor(level):
            return
        self.logger.log(level, message, exc_info=exc, extra={_FIELDS: {**self.fields, **fields}})

    debug = partialmethod(log, logging.DEBUG)
    info = partialmethod(log, logging.INFO)
    warning = partialmethod(log, logging.WARNING)
    error = partialmethod(log, logging.ERROR)

    def log_action(self, action: str, status: str = "success", **fields: Any) -> None:
        """
        Phase boundary record (``train_started``, ``teacher_trained``, ...).

        Examples:
            >>> logger.log_action("teacher_trained", checkpoint="runs/t/model.ckpt")
        """
        self.info(action, action=action, status=status, **fields)


def _console_handler(json_format: bool) -> logging.Handler:
    if json_format:
        handler: logging.Handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(JSONFormatter())
        return handler
    handler = RichHandler(console=console, show_path=False, markup=False, rich_tracebacks=True)
    handler.setFormatter(ContextFormatter("%(message)s"))
    return handler


def _file_handler(path: Path) -> logging.Handler:
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(JSONFormatter())
    return handler


def setup_logging(
    level: Optional[str] = None,
    log_file: Optional[Path] = None,
    json_format: Optional[bool] = None,
) -> None:
    """
    Configure the root logger from ``LoggingSettings``; arguments override it.

    The file log, when enabled, is always JSON.
    """
    settings = LoggingSettings.get_instance()
    level = (level or settings.level).upper()
    numeric = logging.getLevelName(level)
    if not isinstance(numeric, int):
        numeric = logging.INFO
    if json_format is None:
        json_format = settings.format == "json"
    if log_file is None and settings.file_enabled:
        log_file = settings.file_path

    handlers = [_console_handler(json_format)]
    if log_file:
        handlers.append(_file_handler(Path(log_file)))

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(numeric)
    for handler in handlers:
        handler.setLevel(numeric)
        root.addHandler(handler)

    get_logger(__name__).debug("logging configured", log_level=level, json=json_format, file=log_file)


def get_logger(name: str) -> StructuredLogger:
    return StructuredLogger(name)


__all__ = [
    "StructuredLogger",
    "JSONFormatter",
    "console",
    "setup_logging",
    "get_logger",
]
