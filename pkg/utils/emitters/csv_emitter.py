"""
csv_emitter.py

Emit tabular results (trajectories, tables) to a CSV file.

A CSV emitter is the default sink for numeric output:
- Plain text, diff-able, loads straight into pandas or a plotting tool.
- Floats are rendered with 9 significant digits so repeated runs
  produce byte-identical files.

Use this for anything with rows and named columns.
"""

import pathlib

import pandas as pd

from utils.utils_logger import logger

FLOAT_FORMAT = "%.9g"


def emit_frame(frame: pd.DataFrame, *, path: pathlib.Path) -> bool:
    """
    Write a DataFrame to CSV, replacing any existing file.

    Args:
        frame: The rows to write; column names become the header.
        path:  Destination file.

    Returns:
        True if the write succeeded, False otherwise.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        logger.debug(f"[csv_emitter] wrote {len(frame)} row(s) to {path}")
        return True
    except Exception as e:
        logger.error(f"[csv_emitter] failed to write {path}: {e}")
        return False


def render_frame(frame: pd.DataFrame) -> str:
    """Return the CSV text emit_frame would write."""
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT)
