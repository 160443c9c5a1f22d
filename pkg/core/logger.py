"""
Structured logging utility
Provides consistent logging across the application with proper context
"""
import logging
import sys
from typing import Any, Optional

from core.config import LOG_LEVEL

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def resolve_level(level_name: Optional[str] = None) -> int:
    """Map a level name (e.g. from LOG_LEVEL) to a logging level, defaulting to WARNING."""
    name = (level_name or LOG_LEVEL).upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING


def configure_logging(level_name: Optional[str] = None) -> None:
    """
    Configure the root logger for command-line use.

    Logs go to stderr so report output on stdout stays machine-readable.

    Args:
        level_name: Level name; falls back to the LOG_LEVEL env var
    """
    logging.basicConfig(
        level=resolve_level(level_name),
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        stream=sys.stderr,
        force=True
    )


def setup_logger(name: str, level: Optional[int] = None) -> logging.Logger:
    """
    Create a configured logger instance

    Args:
        name: Logger name (typically __name__)
        level: Logging level (default: inherited from the root logger)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if level is not None:
        logger.setLevel(level)
    return logger


def _format_context(context: Optional[dict[str, Any]], separator: str) -> str:
    if not context:
        return ""
    return f"{separator}{context}"


def log_error(logger: logging.Logger, operation: str, error: Exception, context: Optional[dict[str, Any]] = None) -> None:
    """
    Log an error with structured context

    Args:
        logger: Logger instance
        operation: Operation that failed
        error: Exception that occurred
        context: Additional context data
    """
    context_str = _format_context(context, " Context: ")
    logger.error(f"{operation} failed: {str(error)}{context_str}", exc_info=True)


def log_warning(logger: logging.Logger, message: str, context: Optional[dict[str, Any]] = None) -> None:
    """
    Log a warning with structured context

    Args:
        logger: Logger instance
        message: Warning message
        context: Additional context data
    """
    logger.warning(f"{message}{_format_context(context, ' Context: ')}")


def log_info(logger: logging.Logger, message: str, context: Optional[dict[str, Any]] = None) -> None:
    """
    Log info with structured context

    Args:
        logger: Logger instance
        message: Info message
        context: Additional context data
    """
    logger.info(f"{message}{_format_context(context, ' | ')}")
