"""
tests/test_emitters.py

Lightweight tests to verify emitters write CSV / JSON artifacts and report
failures instead of raising. Uses temp paths only.

Usage:
  pytest -q tests/test_emitters.py
"""

#####################################
# Imports
#####################################

import json
import pathlib

import pandas as pd

from utils.emitters import csv_emitter, json_emitter

#####################################
# CSV Emitter
#####################################


def test_csv_emitter_writes_header_and_rows(tmp_path: pathlib.Path):
    out = tmp_path / "traj.csv"
    frame = pd.DataFrame({"r": [0.0, 0.5], "psi": [1.0, 0.9588], "dpsi": [0.0, -0.1613]})

    assert csv_emitter.emit_frame(frame, path=out) is True

    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "r,psi,dpsi"
    assert len(lines) == 3


def test_csv_emitter_uses_nine_significant_digits(tmp_path: pathlib.Path):
    out = tmp_path / "digits.csv"
    frame = pd.DataFrame({"r": [1.0 / 3.0]})

    assert csv_emitter.emit_frame(frame, path=out) is True
    assert out.read_text(encoding="utf-8").splitlines()[1] == "0.333333333"


def test_csv_emitter_creates_parent_directories(tmp_path: pathlib.Path):
    out = tmp_path / "nested" / "dir" / "t.csv"
    assert csv_emitter.emit_frame(pd.DataFrame({"t": [0.0]}), path=out) is True
    assert out.exists()


def test_csv_emitter_reports_failure(tmp_path: pathlib.Path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory", encoding="utf-8")
    # parent path is a regular file, so the write must fail
    assert csv_emitter.emit_frame(pd.DataFrame({"r": [1.0]}), path=blocker / "x.csv") is False


def test_render_frame_matches_file_contents(tmp_path: pathlib.Path):
    out = tmp_path / "same.csv"
    frame = pd.DataFrame({"t": [0.1, 0.2], "value": [1.5, -2.25]})
    csv_emitter.emit_frame(frame, path=out)
    assert csv_emitter.render_frame(frame) == out.read_text(encoding="utf-8")


#####################################
# JSON Emitter
#####################################


def test_json_emitter_is_sorted_and_stable(tmp_path: pathlib.Path):
    out = tmp_path / "scan.json"
    payload = {"kernel_dim": 1, "basis": [{"xi": "r", "eta": "-psi"}], "collisions": []}

    assert json_emitter.emit_payload(payload, path=out) is True
    text = out.read_text(encoding="utf-8")
    assert json.loads(text) == payload
    assert text == json_emitter.render_payload(dict(reversed(list(payload.items()))))
    assert text.endswith("\n")


def test_json_emitter_reports_failure(tmp_path: pathlib.Path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    assert json_emitter.emit_payload({"a": 1}, path=blocker / "y.json") is False
