"""
Structured Logging Configuration for MTransE
JSON formatting in production, readable lines in development

Logs go to stderr: stdout is reserved for report TSV written by the CLI.
"""
import logging
import json
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Optional
from src.config.settings import settings


# Attributes every LogRecord has; anything else came in through `extra=`
_RECORD_FIELDS = {
    "name", "msg", "args", "created", "filename", "funcName",
    "levelname", "levelno", "lineno", "module", "msecs",
    "message", "pathname", "process", "processName", "relativeCreated",
    "thread", "threadName", "exc_info", "exc_text", "stack_info", "taskName",
}


class JSONFormatter(logging.Formatter):
    """
    Custom JSON formatter for structured logging

    Outputs logs in JSON format with consistent structure:
    {
        "timestamp": "ISO8601",
        "level": "INFO|WARNING|ERROR|CRITICAL",
        "message": "Log message",
        "module": "module.name",
        "function": "function_name",
        "line": 123,
        ... any extra context (epoch, language, path, ...)
    }
    """

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON"""
        log_data: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        # Add exception info if present
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        # Add extra fields
        for key, value in record.__dict__.items():
            if key not in _RECORD_FIELDS:
                log_data[key] = value

        return json.dumps(log_data, default=str)


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Setup logging configuration

    Configures:
    - JSON formatting for production, simple format in development
    - Log level from settings (or the explicit override, e.g. from --log-level)
    - A single stderr handler on the "mtranse" logger
    """
    log_level = getattr(logging, (level or settings.log_level or "INFO").upper(), logging.INFO)

    logger = logging.getLogger("mtranse")
    logger.setLevel(log_level)
    logger.propagate = False

    # Remove existing handlers
    logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)

    log_format = settings.log_format or ("json" if settings.app_env == "production" else "text")
    if log_format == "json":
        formatter = JSONFormatter()
    else:
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(module)s:%(funcName)s:%(lineno)d - %(message)s'
        )

    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    return logger


# Create default logger
logger = setup_logging()


def get_logger(name: str = "mtranse") -> logging.Logger:
    """
    Get a logger instance under the "mtranse" hierarchy

    Example:
        logger = get_logger(__name__)
        logger.info("Graph loaded", extra={"language": "en", "triples": 120})
    """
    if name == "mtranse" or name.startswith("mtranse."):
        return logging.getLogger(name)
    return logging.getLogger(f"mtranse.{name}")


# Utility functions for common logging patterns

def log_load(kind: str, path: str, **counts: int) -> None:
    """Log ingestion of an input file together with its statistics"""
    logger.info(
        f"Loaded {kind} from {path}",
        extra={"path": path, "input_kind": kind, **counts, "event_type": "input_loaded"}
    )


def log_epoch(epoch: int, knowledge_mean: float, alignment_mean: float,
              norm_drift: float, wall_ms: float) -> None:
    """Log a finished training epoch"""
    logger.info(
        f"Epoch {epoch} done",
        extra={
            "epoch": epoch,
            "knowledge_mean": knowledge_mean,
            "alignment_mean": alignment_mean,
            "norm_drift": norm_drift,
            "wall_ms": round(wall_ms, 2),
            "event_type": "epoch_completed"
        }
    )


def log_condition(pair: str, matrix: str, condition: float, epoch: Optional[int] = None) -> None:
    """Log the condition number of a transition matrix (invertibility monitoring)"""
    logger.debug(
        f"cond({matrix}) for {pair} = {condition:.4g}",
        extra={
            "pair": pair,
            "matrix": matrix,
            "condition": condition,
            "epoch": epoch,
            "event_type": "condition_monitored"
        }
    )


def log_error(error: Exception, context: Optional[Dict[str, Any]] = None) -> None:
    """Log error with full context"""
    logger.error(
        f"Error: {str(error)}",
        exc_info=True,
        extra={
            "error_type": error.__class__.__name__,
            "context": context or {},
            "event_type": "error_occurred"
        }
    )
