"""Deterministic JSON emission for reports and scenario files.

The standard encoder ties float formatting to ``repr``; reports here pin
every float to 17 significant digits so that identical inputs produce
byte-identical documents.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(x, ".17g")


def _encode(obj, parts: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, Fraction):
        parts.append(json.dumps(str(obj)))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(float(obj)))
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for idx, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            parts.append(pad + json.dumps(key) + ": ")
            _encode(value, parts, indent, level + 1)
            parts.append(",\n" if idx < len(obj) - 1 else "\n")
        parts.append(close_pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            parts.append("[]")
            return
        if all(
            isinstance(v, (int, float, np.integer, np.floating))
            and not isinstance(v, bool)
            for v in items
        ):
            scalars = [
                str(int(v))
                if isinstance(v, (int, np.integer))
                else format_float(float(v))
                for v in items
            ]
            parts.append("[" + ", ".join(scalars) + "]")
            return
        parts.append("[\n")
        for idx, value in enumerate(items):
            parts.append(pad)
            _encode(value, parts, indent, level + 1)
            parts.append(",\n" if idx < len(items) - 1 else "\n")
        parts.append(close_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    parts: list[str] = []
    _encode(obj, parts, indent, 0)
    parts.append("\n")
    return "".join(parts)


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
