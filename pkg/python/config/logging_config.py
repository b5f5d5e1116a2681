"""
Logging Configuration
=====================
Centralized logging for the workbench.

Usage in any module:
    import logging
    logger = logging.getLogger(__name__)
    logger.info("Building Fock representation...")

The CLI (cli.py) calls setup_logging() once at startup. Records carry the id of the
check that emitted them (set by check_scope), and run_log() captures a whole suite run,
per-case residuals included, in a DEBUG-level file next to the report.
"""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s [%(check_id)s]: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

# Logger namespace of the library modules
CORE_LOGGER = 'core'

_current_check: ContextVar[str] = ContextVar('current_check', default='-')


class CheckIdFilter(logging.Filter):
    """Stamps every record with the id of the check running in the current context."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.check_id = _current_check.get()
        return True


@contextmanager
def check_scope(check_id: str) -> Iterator[None]:
    """Attribute the records emitted inside the block to `check_id`."""
    token = _current_check.set(check_id)
    try:
        yield
    finally:
        _current_check.reset(token)


def _handler(handler: logging.Handler, level: int) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT))
    handler.addFilter(CheckIdFilter())
    return handler


def setup_logging(level: str = 'INFO', log_file: str | None = None) -> None:
    """
    Configure the root logger for the workbench.

    Args:
        level: Log level name (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        log_file: Optional path to a log file. If None, logs to stderr only.
    """
    root = logging.getLogger()

    # Avoid adding duplicate handlers on repeated calls
    if root.handlers:
        return

    numeric = getattr(logging, level.upper(), logging.INFO)
    root.setLevel(numeric)

    # stdout carries the JSON output of the CLI
    root.addHandler(_handler(logging.StreamHandler(sys.stderr), numeric))

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        root.addHandler(_handler(logging.FileHandler(log_path, encoding='utf-8'), numeric))


@contextmanager
def run_log(path: str | Path | None) -> Iterator[Path | None]:
    """
    Write every core record of the block, DEBUG included, to `path`.

    The core loggers are lowered to DEBUG for the duration; console handlers keep their own
    level, so stderr output does not change. A None path makes this a no-op.
    """
    if path is None:
        yield None
        return
    log_path = Path(path)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = _handler(logging.FileHandler(log_path, mode='w', encoding='utf-8'), logging.DEBUG)
    core = logging.getLogger(CORE_LOGGER)
    previous = core.level
    core.setLevel(logging.DEBUG)
    core.addHandler(handler)
    try:
        yield log_path
    finally:
        core.removeHandler(handler)
        core.setLevel(previous)
        handler.close()
