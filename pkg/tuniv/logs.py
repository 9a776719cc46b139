# Logging
#> One rich handler on the package logger; every module logs through
#> logging.getLogger(__name__) beneath it.

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "tuniv"


def setup_logging(level: str | None = None) -> logging.Logger:
    """Attach a rich handler writing to stderr; safe to call repeatedly."""
    level = (level or os.environ.get("TUNIV_LOG_LEVEL") or "WARNING").upper()
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            rich_tracebacks=False,
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.propagate = False
    return logger
