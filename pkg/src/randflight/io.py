"""CSV tables and JSON sidecars.

CSV files carry a header row and 17 significant digits so binary64 values
round-trip exactly.  Every table written through :func:`write_table` gets a
``<name>.json`` sidecar next to it.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

import randflight


def format_rows(header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def write_table(path, header, columns, meta: dict) -> Path:
    path = Path(path)
    path.write_text(format_rows(header, columns))
    side = sidecar_path(path)
    payload = {"toolkit": "randflight", "version": randflight.__version__, **meta}
    side.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return side


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)


def read_table(path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    return header, data
