"""Readers for the file formats written by the torusmut CLI.

Every reader validates the schema it depends on and raises
:class:`SchemaError` naming the offending file and column/key, so a
figure request against the wrong file fails with a usable message
instead of a matplotlib traceback.
"""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

__all__ = [
    "SchemaError",
    "EventRow",
    "read_samples",
    "sigma_columns",
    "column_values",
    "read_cdf_grid",
    "read_report",
    "read_meta",
    "read_events",
]


class SchemaError(ValueError):
    """An input file is missing, malformed, or lacks a required column."""


def _require_file(path: str) -> None:
    if not os.path.isfile(path):
        raise SchemaError(f"input file not found: {path!r}")


# ---------------------------------------------------------------------------
# replicates.csv / samples.csv  (identical schema, one row per replicate)
# ---------------------------------------------------------------------------

def read_samples(path: str) -> Tuple[List[str], List[Dict[str, str]]]:
    """Read a per-replicate sample table; returns (header, rows).

    Requires a ``replicate_index`` column and at least one data row.
    """
    _require_file(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path!r}: empty file, expected a CSV header")
        rows = [dict(zip(header, row)) for row in reader if row]
    if "replicate_index" not in header:
        raise SchemaError(
            f"{path!r}: missing column 'replicate_index' "
            f"(found {header!r})")
    if not rows:
        raise SchemaError(f"{path!r}: no replicate rows")
    return header, rows


def sigma_columns(header: Sequence[str]) -> List[str]:
    """The passage-time columns ``sigma_1..sigma_K`` in index order."""
    cols = [c for c in header if re.fullmatch(r"sigma_\d+", c)]
    return sorted(cols, key=lambda c: int(c.split("_")[1]))


def column_values(path: str, header: Sequence[str],
                  rows: Sequence[Dict[str, str]], column: str) -> np.ndarray:
    """Extract one column as floats; SchemaError if absent or non-numeric."""
    if column not in header:
        raise SchemaError(
            f"{path!r}: missing column {column!r} (found {list(header)!r})")
    try:
        return np.array([float(r[column]) for r in rows])
    except ValueError as exc:
        raise SchemaError(f"{path!r}: non-numeric value in {column!r}: {exc}")


# ---------------------------------------------------------------------------
# cdf.csv  (limit-law grid: t, F)
# ---------------------------------------------------------------------------

def read_cdf_grid(path: str) -> Tuple[np.ndarray, np.ndarray]:
    _require_file(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path!r}: empty file, expected header 't,F'")
        if header[:2] != ["t", "F"]:
            raise SchemaError(
                f"{path!r}: expected header 't,F', found {header!r}")
        t, f = [], []
        for row in reader:
            if not row:
                continue
            try:
                t.append(float(row[0]))
                f.append(float(row[1]))
            except (IndexError, ValueError):
                raise SchemaError(f"{path!r}: malformed grid row {row!r}")
    if not t:
        raise SchemaError(f"{path!r}: no grid rows")
    return np.array(t), np.array(f)


# ---------------------------------------------------------------------------
# report.json / meta.json
# ---------------------------------------------------------------------------

def _read_json(path: str) -> dict:
    _require_file(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path!r}: invalid JSON: {exc}")
    if not isinstance(data, dict):
        raise SchemaError(f"{path!r}: expected a JSON object")
    return data


def read_report(path: str) -> dict:
    """Validation report; must carry a list of per-target results."""
    data = _read_json(path)
    targets = data.get("targets")
    if not isinstance(targets, list):
        raise SchemaError(f"{path!r}: missing key 'targets' (list)")
    return data


def read_meta(path: str) -> dict:
    """Run metadata; must carry the resolved model block (d, L, alpha)."""
    data = _read_json(path)
    model = data.get("config", {}).get("model")
    if not isinstance(model, dict):
        raise SchemaError(f"{path!r}: missing key 'config.model'")
    for key in ("d", "L", "alpha"):
        if key not in model:
            raise SchemaError(f"{path!r}: missing key 'config.model.{key}'")
    return data


# ---------------------------------------------------------------------------
# events.csv  (accepted mutation events, one row each)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EventRow:
    replicate_index: int
    mtype: int
    time: float
    coords: Tuple[float, ...]


def read_events(path: str) -> List[EventRow]:
    _require_file(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path!r}: empty file, expected a CSV header")
        fixed = ["replicate_index", "mtype", "time"]
        if header[:3] != fixed:
            raise SchemaError(
                f"{path!r}: expected leading columns {fixed!r}, "
                f"found {header!r}")
        coord_cols = header[3:]
        expected = [f"x_{i}" for i in range(1, len(coord_cols) + 1)]
        if not coord_cols or coord_cols != expected:
            raise SchemaError(
                f"{path!r}: expected coordinate columns {expected or ['x_1']!r}"
                f", found {coord_cols!r}")
        events = []
        for row in reader:
            if not row:
                continue
            try:
                events.append(EventRow(
                    replicate_index=int(row[0]),
                    mtype=int(row[1]),
                    time=float(row[2]),
                    coords=tuple(float(v) for v in row[3:])))
            except (IndexError, ValueError):
                raise SchemaError(f"{path!r}: malformed event row {row!r}")
    if not events:
        raise SchemaError(f"{path!r}: no event rows")
    return events
