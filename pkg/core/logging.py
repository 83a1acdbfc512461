"""Structured logging configuration using structlog."""

import logging
import sys
import uuid
from contextvars import ContextVar
from typing import Any

import structlog
from structlog.typing import EventDict, Processor

from core.config import TOOL_NAME, TOOL_VERSION, settings

# Context variable for the per-invocation run ID
run_id_var: ContextVar[str] = ContextVar("run_id", default="")

# Effective (level, json) of the last configure_logging call, handed to worker processes
_active_config: tuple[str, bool] = ("WARNING", False)


def get_run_id() -> str:
    """Get the current run ID."""
    return run_id_var.get()


def set_run_id(run_id: str | None = None) -> str:
    """Set a new run ID and return it."""
    if run_id is None:
        run_id = uuid.uuid4().hex[:12]
    run_id_var.set(run_id)
    return run_id


def add_run_id(logger: Any, method_name: str, event_dict: EventDict) -> EventDict:
    """Add run ID to log entries."""
    run_id = get_run_id()
    if run_id:
        event_dict["run_id"] = run_id
    return event_dict


def add_tool_context(logger: Any, method_name: str, event_dict: EventDict) -> EventDict:
    """Add tool name and version."""
    event_dict["tool"] = TOOL_NAME
    event_dict["version"] = TOOL_VERSION
    return event_dict


def configure_logging(level: str | None = None, json_output: bool | None = None) -> None:
    """Configure structured logging for the toolkit.

    Events go to stderr; stdout is reserved for command results.
    """
    level_name = (level or settings.log_level).upper()
    use_json = settings.log_json if json_output is None else json_output
    global _active_config
    _active_config = (level_name, use_json)

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level_name, logging.WARNING),
        force=True,
    )

    processors: list[Processor] = [
        structlog.stdlib.filter_by_level,
        add_run_id,
        add_tool_context,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]

    if use_json:
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        context_class=dict,
        cache_logger_on_first_use=True,
    )


def active_logging_config() -> tuple[str, bool]:
    """Level name and JSON flag currently in effect."""
    return _active_config


def init_worker(level: str, json_output: bool, run_id: str) -> None:
    """Process-pool initializer: same logging setup and run id as the parent."""
    configure_logging(level=level, json_output=json_output)
    set_run_id(run_id)


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """
    Get a structured logger instance.

    Args:
        name: Logger name (defaults to calling module)

    Returns:
        Configured structlog BoundLogger instance
    """
    logger: structlog.stdlib.BoundLogger = structlog.get_logger(name)
    return logger


# Convenience loggers for different components
cli_logger = get_logger("cli")
service_logger = get_logger("service")
repository_logger = get_logger("repository")


class LoggingMixin:
    """Mixin class to add logging capabilities to any class."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.logger = get_logger(self.__class__.__name__)

    def log_operation_start(self, operation: str, **kwargs: Any) -> None:
        """Log the start of an operation."""
        self.logger.debug(
            f"{operation} started",
            operation=operation,
            component=self.__class__.__name__,
            **kwargs,
        )

    def log_operation_success(self, operation: str, **kwargs: Any) -> None:
        """Log successful completion of an operation."""
        self.logger.info(
            f"{operation} completed successfully",
            operation=operation,
            component=self.__class__.__name__,
            status="success",
            **kwargs,
        )

    def log_operation_error(self, operation: str, error: Exception, **kwargs: Any) -> None:
        """Log an operation error."""
        self.logger.error(
            f"{operation} failed",
            operation=operation,
            component=self.__class__.__name__,
            status="error",
            error_type=type(error).__name__,
            error_message=str(error),
            **kwargs,
        )

    def log_validation_error(self, operation: str, validation_errors: list[str], **kwargs: Any) -> None:
        """Log validation errors."""
        self.logger.warning(
            f"{operation} validation failed",
            operation=operation,
            component=self.__class__.__name__,
            status="validation_error",
            validation_errors=validation_errors,
            **kwargs,
        )


class CommandLogger:
    """Subcommand logging utilities."""

    @staticmethod
    def log_command_start(command: str, **kwargs: Any) -> None:
        """Log a subcommand invocation."""
        cli_logger.info("Command started", command=command, **kwargs)

    @staticmethod
    def log_command_complete(command: str, exit_code: int, duration_ms: float, **kwargs: Any) -> None:
        """Log subcommand completion."""
        log_level = "error" if exit_code != 0 else "info"

        getattr(cli_logger, log_level)(
            "Command completed",
            command=command,
            exit_code=exit_code,
            duration_ms=round(duration_ms, 2),
            **kwargs,
        )


class RepositoryLogger:
    """File read/write logging utilities."""

    @staticmethod
    def log_read(kind: str, path: str, size: int, **kwargs: Any) -> None:
        """Log a file read."""
        repository_logger.debug(f"Read {kind}", kind=kind, path=path, bytes=size, **kwargs)

    @staticmethod
    def log_write(kind: str, path: str, size: int, **kwargs: Any) -> None:
        """Log a file write."""
        repository_logger.debug(f"Wrote {kind}", kind=kind, path=path, bytes=size, **kwargs)
