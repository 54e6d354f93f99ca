"""Logging module for entrolab."""

import logging
import sys
from pathlib import Path
from typing import Optional, TextIO


LOG_FORMAT = '[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logger(
    log_file_path: Optional[str],
    name: str = "entrolab",
    level: str = "INFO",
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """Configure and return a logger instance.

    Library modules log through children of ``name`` (``entrolab.entropy``
    and so on), so configuring the package logger once is enough.

    Args:
        log_file_path: Path to the log file (supports ~ expansion), or None
            for no file output
        name: Logger name
        level: Minimum level for the handlers
        stream: Optional text stream (the CLI passes stderr)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    # Clear existing handlers to avoid duplicates
    for handler in logger.handlers[:]:
        handler.close()
        logger.removeHandler(handler)

    # [TIMESTAMP] [LEVEL] [COMPONENT] MESSAGE
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if log_file_path:
        expanded_path = Path(log_file_path).expanduser()
        expanded_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(expanded_path)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    if stream is not None:
        stream_handler = logging.StreamHandler(stream)
        stream_handler.setLevel(level)
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)

    if not logger.handlers:
        logger.addHandler(logging.NullHandler())

    return logger


class ComputationLogger:
    """Wrapper for logging problem runs and their outcomes."""

    def __init__(self, log_file_path: Optional[str], level: str = "INFO", stream: Optional[TextIO] = None):
        """Initialize logger with file path.

        Args:
            log_file_path: Path to the log file (supports ~ expansion)
            level: Minimum level written to the handlers
            stream: Optional diagnostics stream, typically ``sys.stderr``
        """
        self.log_file_path = log_file_path
        self.level = level
        self.stream = stream
        self._logger: Optional[logging.Logger] = None

    @classmethod
    def for_cli(cls, log_file_path: Optional[str], level: str = "INFO") -> "ComputationLogger":
        """Logger writing to the log file and to stderr."""
        return cls(log_file_path, level=level, stream=sys.stderr)

    @property
    def logger(self) -> logging.Logger:
        """Lazy initialization of the logger."""
        if self._logger is None:
            self._logger = setup_logger(self.log_file_path, level=self.level, stream=self.stream)
        return self._logger

    def log_task(self, task: str, source: str) -> None:
        """Log the start of a task.

        Args:
            task: Task name from the problem file
            source: Where the problem came from (file path or suite name)
        """
        self.logger.info(f"Running task {task} from {source}")

    def log_result(self, task: str, summary: str) -> None:
        """Log a finished task with INFO level."""
        self.logger.info(f"Task {task} finished: {summary}")

    def log_error(self, message: str) -> None:
        """Log an error with ERROR level."""
        self.logger.error(message)

    def log_warning(self, message: str) -> None:
        """Log a warning with WARNING level."""
        self.logger.warning(message)

    def close(self) -> None:
        """Close and detach all handlers."""
        if self._logger is None:
            return
        for handler in self._logger.handlers[:]:
            handler.close()
            self._logger.removeHandler(handler)
