"""Deterministic structured-text (JSON) writer.

``json.dumps`` gives no control over float formatting, so reports and model
files are emitted through this small writer instead: keys keep insertion
order, floats use a fixed printf format, and the output is plain JSON that
``json.loads`` reads back.
"""

from __future__ import annotations

import json
import math


def dumps(obj, float_fmt: str = "%.9g", indent: int = 2) -> str:
    out: list[str] = []
    _write(obj, float_fmt, indent, 0, out)
    out.append("\n")
    return "".join(out)


def _write(obj, fmt, indent, level, out):
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj!r}")
        out.append(fmt % obj)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _write(value, fmt, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(close_pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(seq):
            out.append(pad)
            _write(value, fmt, indent, level + 1, out)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(close_pad + "]")
    else:
        raise TypeError(f"unsupported type {type(obj).__name__} in structured text")
