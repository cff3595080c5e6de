"""
utils/emitters/__init__.py

Emitters write results from the solver layer to a sink.

- csv_emitter.py  - tabular rows (trajectories, first-zero tables) as CSV
- json_emitter.py - structured payloads (symmetry scans, run reports) as JSON

Each emitter returns True on success and False on failure, logging the
reason; callers decide what a failed write means for them.
"""

from . import csv_emitter
from . import json_emitter

__all__ = [
    "csv_emitter",
    "json_emitter",
]
