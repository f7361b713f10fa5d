"""Text formats: a JSON writer that keeps full float precision, and delimited columns."""

import json
import math
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.17g"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return json.dumps(str(v))
        return FLOAT_FORMAT % v
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits (bit-exact round trip)."""
    return _encode(obj, indent, 0) + "\n"


def loads(text):
    def fix(v):
        if isinstance(v, str) and v in ("nan", "inf", "-inf"):
            return float(v)
        if isinstance(v, list):
            return [fix(x) for x in v]
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        return v
    return fix(json.loads(text))


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return loads(Path(path).read_text(encoding="utf-8"))


def format_columns(header, columns, digits=15, delimiter=","):
    fmt = f"%.{digits}g"
    cols = [np.asarray(c) for c in columns]
    lines = [delimiter.join(header)]
    for row in zip(*cols):
        lines.append(delimiter.join(
            fmt % v if isinstance(v, (float, np.floating)) else str(v) for v in row
        ))
    return "\n".join(lines) + "\n"


def write_columns(path, header, columns, digits=15, delimiter=","):
    Path(path).write_text(format_columns(header, columns, digits, delimiter), encoding="utf-8")
