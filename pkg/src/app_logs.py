import json
import logging
import math
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, Optional

from src.config.app_config import app_config


class LogLevels(str, Enum):
    info = "INFO"
    warn = "WARNING"
    error = "ERROR"
    debug = "DEBUG"


def _json_value(value: Any) -> Any:
    """Log fields keep their numeric type; NaN and inf become null"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if hasattr(value, "tolist"):
        return _json_value(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_json_value(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _json_value(item) for key, item in value.items()}
    return str(value)


class StructuredLogger:
    """
    Structured logger for the controller and its experiments.

    In Clean Architecture:
    - This is part of the Frameworks & Drivers layer
    - It writes one JSON object per log line
    - It carries bound run context (seed, experiment, controller) into every line
    """

    def __init__(self, name: str, context: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(name)
        self.name = name
        self.context = dict(context or {})

    def bind(self, **context) -> "StructuredLogger":
        """Copy of this logger that adds `context` to every line"""
        return StructuredLogger(self.name, {**self.context, **context})

    def _format_log(self, level: str, message: str, **kwargs) -> str:
        """Format log message as structured JSON"""
        if isinstance(level, LogLevels):
            level = level.value
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": level,
            "logger": self.name,
            "message": message,
        }
        for key, value in {**self.context, **kwargs}.items():
            log_entry[key] = _json_value(value)
        return json.dumps(log_entry)

    def _log(self, level: int, label: str, message: str, **kwargs) -> None:
        if self.logger.isEnabledFor(level):
            self.logger.log(level, self._format_log(label, message, **kwargs))

    def info(self, message: str, **kwargs):
        self._log(logging.INFO, "INFO", message, **kwargs)

    def warning(self, message: str, **kwargs):
        self._log(logging.WARNING, "WARNING", message, **kwargs)

    def error(self, message: str, **kwargs):
        self._log(logging.ERROR, "ERROR", message, **kwargs)

    def debug(self, message: str, **kwargs):
        self._log(logging.DEBUG, "DEBUG", message, **kwargs)

    def exception(self, message: str, exc_info: Optional[Exception] = None, **kwargs):
        """Log an exception as an error line with its type and message"""
        if exc_info:
            kwargs["exception_type"] = type(exc_info).__name__
            kwargs["exception_message"] = str(exc_info)
        self._log(logging.ERROR, "ERROR", message, **kwargs)


def configure_logging(log_level: str = None):
    """Configure logging for the command line; unknown levels fall back to ERROR"""
    if log_level is None:
        log_level = app_config.log_level
    if isinstance(log_level, LogLevels):
        log_level = log_level.value

    log_level = str(log_level).upper()
    if log_level == "WARN":
        log_level = LogLevels.warn.value
    if log_level not in [level.value for level in LogLevels]:
        log_level = LogLevels.error.value

    if log_level == LogLevels.debug.value:
        logging.basicConfig(level=log_level, format=app_config.log_format)
    else:
        logging.basicConfig(level=log_level, format="%(message)s")


def get_logger(name: str, **context) -> StructuredLogger:
    """Get a structured logger instance"""
    return StructuredLogger(name, context)
