import json
import logging

import numpy as np

from src.app_logs import LogLevels, StructuredLogger, configure_logging, get_logger


def test_format_log_is_json():
    logger = StructuredLogger("test")
    entry = json.loads(logger._format_log(LogLevels.info, "message", seed=3))
    assert entry["level"] == "INFO"
    assert entry["message"] == "message"
    assert entry["logger"] == "test"
    assert entry["seed"] == 3
    assert entry["timestamp"].endswith("Z")


def test_numeric_fields_stay_numeric():
    logger = StructuredLogger("test")
    entry = json.loads(
        logger._format_log(
            "INFO",
            "step",
            theta_eps=np.float64(0.25),
            q=np.array([1.0, 2.0]),
            manip=float("nan"),
            status=LogLevels.warn,
            solver=object,
        )
    )
    assert entry["theta_eps"] == 0.25
    assert entry["q"] == [1.0, 2.0]
    assert entry["manip"] is None
    assert entry["status"] == "WARNING"
    assert isinstance(entry["solver"], str)


def test_bind_adds_context_without_touching_parent():
    parent = get_logger("test", experiment="exp1a")
    child = parent.bind(seed=7)
    entry = json.loads(child._format_log("INFO", "run"))
    assert entry["experiment"] == "exp1a" and entry["seed"] == 7
    assert "seed" not in json.loads(parent._format_log("INFO", "run"))
    assert json.loads(child._format_log("INFO", "run", seed=8))["seed"] == 8


def test_logging_calls_do_not_raise():
    logger = StructuredLogger("test")
    logger.info("info message", key="val")
    logger.warning("warn", foo="bar")
    logger.error("err", foo="bar")
    logger.debug("debug", foo="bar")
    try:
        raise ValueError("fail")
    except Exception as e:
        logger.exception("exc", exc_info=e)


def test_configure_logging_and_get_logger():
    configure_logging("DEBUG")
    configure_logging("warn")
    configure_logging("verbose")
    configure_logging(LogLevels.info)
    logger = get_logger("test")
    assert isinstance(logger, StructuredLogger)
    assert logger.logger is logging.getLogger("test")
