import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

# File logging is opt-in; the CLI is often piped into CSV consumers.
LOGS_PATH = os.getenv("LATTICE_REWRITE_LOGS_PATH")

# Rich console setup. Logs go to stderr so stdout stays clean for CSV and JSON.
console = Console(
    stderr=True,
    theme=Theme(
        {
            "info": "cyan",
            "warning": "yellow",
            "error": "red",
            "success": "green",
            "write": "bold cyan",
            "sweep": "bold green",
        }
    ),
)

# Create logger
logger = logging.getLogger("lattice_rewrite")

_configured = False


def log_write(write_count: int, block: Any, x: Any, volume: Any):
    """Log one accepted word write."""
    logger.debug(f"Write #{write_count} -> block {block} x={x} remaining volume={volume}")


def log_trial_result(seed: int, writes: int):
    """Log the outcome of one lifetime trial."""
    logger.debug(f"Trial seed={seed} finished after {writes} writes")


def log_sweep_row(q: Any, M: Any, mean: Optional[float], note: str = ""):
    """Log a formatted sweep row."""
    if note:
        logger.warning(f"Sweep q={q} M={M} ✗ SKIPPED: {note}")
    else:
        logger.info(f"Sweep q={q} M={M} ✓ mean writes {mean:.4f}")


def set_log_level(level: str):
    """Set the logging level for all handlers."""
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {level}")

    for handler in logging.getLogger().handlers:
        if isinstance(handler, RichHandler):
            handler.setLevel(numeric_level)

    logging.getLogger().setLevel(numeric_level)

    for logger_name in ("lattice_rewrite",):
        named = logging.getLogger(logger_name)
        named.setLevel(numeric_level)
        named.propagate = True


def setup_logging():
    """Configure logging to the console with Rich formatting, and optionally to a file."""
    global _configured
    log_level = os.getenv("LATTICE_REWRITE_LOG_LEVEL", "WARNING")

    if not _configured:
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG)

        if LOGS_PATH:
            logs_dir = Path(LOGS_PATH)
            logs_dir.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(logs_dir / f"{datetime.now().strftime('%Y-%m-%d')}.log")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
            )
            root_logger.addHandler(file_handler)

        console_handler = RichHandler(
            console=console,
            show_time=True,
            show_path=False,
            rich_tracebacks=True,
            markup=False,
        )
        console_handler.setLevel(logging.INFO)
        root_logger.addHandler(console_handler)

        for logger_name in (
            "lattice_rewrite",
            "lattice_rewrite.codec",
            "lattice_rewrite.memsim",
            "lattice_rewrite.cli",
        ):
            named = logging.getLogger(logger_name)
            named.setLevel(logging.INFO)
            named.propagate = True
        _configured = True

    set_log_level(log_level)

    return logger
