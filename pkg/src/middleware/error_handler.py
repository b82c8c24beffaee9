"""
Global Error Handler
Single error boundary of the command-line interface

Features:
- Catches MTransEException and returns its exit code
- Prints a one-line diagnostic `error[CODE]: message` on stderr
- Logs all errors with full context
- Returns 1 for unexpected exceptions
- Development mode prints stack traces
"""
import sys
import traceback
from typing import Any, Callable, IO, Optional

from src.config.settings import settings
from src.core.exceptions import InternalError, MTransEException
from src.core.logging import log_error, logger

EXIT_OK = 0
EXIT_USAGE = 2


def _diagnostic(stream: IO[str], code: str, message: str, details: Optional[dict] = None) -> None:
    stream.write(f"error[{code}]: {message}\n")
    for key, value in (details or {}).items():
        stream.write(f"  {key}: {value}\n")
    stream.flush()


def handle_mtranse_exception(exc: MTransEException, command: str, stream: IO[str]) -> int:
    """
    Handle custom MTransE exceptions

    Writes the diagnostic and returns the exception family's exit code.
    """
    logger.warning(
        f"{command} failed: {exc.message}",
        extra={"command": command, "error_code": exc.error_code, "error_details": exc.details,
               "exit_code": exc.exit_code}
    )
    _diagnostic(stream, exc.error_code, exc.message, exc.details)
    return exc.exit_code


def handle_unexpected_exception(exc: Exception, command: str, stream: IO[str]) -> int:
    """
    Catch-all handler for unexpected exceptions

    Logs the full stack trace; in development the trace is printed as well.
    """
    error = InternalError(f"{type(exc).__name__}: {exc}", error_code="INTERNAL_ERROR",
                          details={"exception_type": type(exc).__name__})
    log_error(exc, context={"command": command, **error.to_dict()})
    _diagnostic(stream, error.error_code, error.message)
    if settings.app_env == "development":
        stream.write(traceback.format_exc())
        stream.flush()
    return error.exit_code


def run_command(handler: Callable[[Any], None], args: Any, command: str = "",
                stream: Optional[IO[str]] = None) -> int:
    """
    Run a command handler and map its outcome to an exit code

    0 only when the handler returns normally (all outputs written).

    Order matters: most specific first
    1. MTransEException (family exit code)
    2. KeyboardInterrupt (130)
    3. Exception (1)
    """
    stream = stream or sys.stderr
    try:
        handler(args)
        return EXIT_OK
    except MTransEException as exc:
        return handle_mtranse_exception(exc, command, stream)
    except KeyboardInterrupt:
        _diagnostic(stream, "INTERRUPTED", "interrupted")
        return 130
    except Exception as exc:  # noqa: BLE001
        return handle_unexpected_exception(exc, command, stream)
