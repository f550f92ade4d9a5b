"""Log setup shared by the CLI and the library modules.

stdout is reserved for JSON reports; records go to stderr. A terminal gets rich
output, anything else (pipes, CI) gets one timestamped line per record.
"""

import logging
import sys

from rich.console import Console
from rich.logging import RichHandler

DEBUG = logging.DEBUG
INFO = logging.INFO

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class InteractiveLogHandler(RichHandler):
    """Rich handler on a stderr console."""

    def __init__(self) -> None:
        super().__init__(
            console=Console(stderr=True),
            rich_tracebacks=True,
            show_path=False,
            log_time_format="[%X]",
            markup=False,
        )


class NonInteractiveLogHandler(logging.StreamHandler):
    """Plain stderr handler for captured output."""

    def __init__(self) -> None:
        super().__init__(sys.stderr)
        self.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))


def configure_logging(level: int = INFO, *, interactive: bool | None = None) -> None:
    """Install a single root handler at ``level``.

    Parameters
    ----------
    level : int, default=INFO
        Root log level; ``--debug`` passes DEBUG to see restart and residual traces.
    interactive : bool, optional
        Force the rich or the plain handler. Detected from stderr when omitted.

    """
    if interactive is None:
        interactive = sys.stderr.isatty()
    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.setLevel(level)
    root.addHandler(InteractiveLogHandler() if interactive else NonInteractiveLogHandler())
    # numpy RuntimeWarnings (overflow in a descent, singular solves) end up in the log
    logging.captureWarnings(capture=True)


def get_logger(name: str) -> logging.Logger:
    """Return the logger ``mapcone.<name>``; names already under ``mapcone`` are kept."""
    if name == "mapcone" or name.startswith("mapcone."):
        return logging.getLogger(name)
    return logging.getLogger(f"mapcone.{name}")
