"""Deterministic JSON and CSV writers.

All floating-point values are serialized with 17 significant digits
(round-trip exact for IEEE doubles) and dictionary key order is the
insertion order, so identical data produces byte-identical files.
NaN serializes to null (JSON has no NaN).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.17g}"


def _dumps(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                parts.append(",")
            _dumps(str(key), parts)
            parts.append(":")
            _dumps(val, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        if isinstance(obj, np.ndarray):
            obj = obj.tolist()
        parts.append("[")
        for i, val in enumerate(obj):
            if i:
                parts.append(",")
            _dumps(val, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    parts: list[str] = []
    _dumps(obj, parts)
    return "".join(parts)


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def write_csv(path, header: list[str], rows) -> None:
    """Write rows of numbers; floats via format_float, ints verbatim."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(format_float(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
