"""JSON emission with a pinned number format.

All floats are written with 17 significant digits so that output files are
byte-stable across platforms and fully round-trip in double precision.
Parsing is plain ``json.loads``.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

loads = json.loads


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    s = format(x, ".17g")
    return s


def _emit(obj: Any, indent: int | None, level: int) -> str:
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        obj = int(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = [(json.dumps(str(k)), _emit(v, indent, level + 1)) for k, v in obj.items()]
        if indent is None:
            return "{" + ", ".join(f"{k}: {v}" for k, v in items) + "}"
        pad = " " * (indent * (level + 1))
        closing = " " * (indent * level)
        if not items:
            return "{}"
        body = (",\n").join(f"{pad}{k}: {v}" for k, v in items)
        return "{\n" + body + "\n" + closing + "}"
    if isinstance(obj, (list, tuple)):
        parts = [_emit(v, indent, level + 1) for v in obj]
        if indent is None:
            return "[" + ", ".join(parts) + "]"
        pad = " " * (indent * (level + 1))
        closing = " " * (indent * level)
        if not parts:
            return "[]"
        return "[\n" + (",\n").join(pad + p for p in parts) + "\n" + closing + "]"
    raise TypeError(f"cannot serialize object of type {type(obj)!r}")


def dumps(obj: Any, indent: int | None = None) -> str:
    return _emit(obj, indent, 0)
