"""
json_emitter.py

Emit structured results (scan kernels, run reports) to a JSON file.

Keys are sorted and exact rationals are expected to arrive already
rendered as 'p/q' strings, so the same inputs always give the same bytes.
"""

import json
import pathlib
from typing import Any, Mapping

from utils.utils_logger import logger


def render_payload(payload: Mapping[str, Any]) -> str:
    """Return the canonical JSON text for a payload (trailing newline included)."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def emit_payload(payload: Mapping[str, Any], *, path: pathlib.Path) -> bool:
    """
    Write one JSON document to a file, replacing any existing file.

    Args:
        payload: JSON-serializable mapping.
        path:    Destination file.

    Returns:
        True if the write succeeded, False otherwise.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_payload(payload), encoding="utf-8")
        logger.debug(f"[json_emitter] wrote payload to {path}")
        return True
    except Exception as e:
        logger.error(f"[json_emitter] failed to write {path}: {e}")
        return False
