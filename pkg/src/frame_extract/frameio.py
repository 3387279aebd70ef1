"""Reading and writing frame files.

Two formats are supported, chosen by file extension:

* JSON (``.json``): ``{"dim": n, "vectors": [[...], ...]}``
* CSV (anything else): one vector per line, comma-separated coordinates;
  the dimension is inferred from the first line.

Writers emit floats with 17 significant digits so a written frame reads
back bit-identically.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .frame_core import Frame
from .report import dumps_canonical, format_float

__all__ = ["FrameFileError", "read_frame", "write_frame", "frame_to_dict", "frame_from_dict"]


class FrameFileError(ValueError):
    """Malformed frame file; carries 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


def frame_to_dict(frame: Frame) -> dict:
    return {"dim": frame.dim, "vectors": frame.vectors.tolist()}


def frame_from_dict(obj) -> Frame:
    if not isinstance(obj, dict):
        raise FrameFileError("top-level value must be an object with 'dim' and 'vectors'")
    if "dim" not in obj or "vectors" not in obj:
        raise FrameFileError("missing required key 'dim' or 'vectors'")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FrameFileError(f"'dim' must be a positive integer, got {dim!r}")
    rows = obj["vectors"]
    if not isinstance(rows, list) or not rows:
        raise FrameFileError("'vectors' must be a non-empty list of vectors")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise FrameFileError(
                f"vector {i} must be a list of {dim} numbers", line=None
            )
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise FrameFileError(f"vector {i}, coordinate {j} is not a number")
    arr = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise FrameFileError("frame file contains non-finite entries")
    return Frame(dim=dim, vectors=arr)


def _read_frame_json(path: str) -> Frame:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FrameFileError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno)
    return frame_from_dict(obj)


def _read_frame_csv(path: str) -> Frame:
    rows: list[list[float]] = []
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(",")
            row = []
            for colno, field in enumerate(fields, start=1):
                try:
                    row.append(float(field))
                except ValueError:
                    raise FrameFileError(
                        f"could not parse {field.strip()!r} as a number",
                        line=lineno,
                        column=colno,
                    )
            if dim is None:
                dim = len(row)
            elif len(row) != dim:
                raise FrameFileError(
                    f"expected {dim} coordinates, found {len(row)}", line=lineno
                )
            rows.append(row)
    if dim is None:
        raise FrameFileError("frame file contains no vectors", line=1)
    arr = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise FrameFileError("frame file contains non-finite entries")
    return Frame(dim=dim, vectors=arr)


def read_frame(path: str) -> Frame:
    """Load a frame file, dispatching on extension (.json vs CSV)."""
    if not os.path.exists(path):
        raise FrameFileError(f"no such file: {path}")
    if os.path.splitext(path)[1].lower() == ".json":
        return _read_frame_json(path)
    return _read_frame_csv(path)


def write_frame(frame: Frame, path: str) -> None:
    """Write a frame file, format chosen by extension (.json vs CSV)."""
    if os.path.splitext(path)[1].lower() == ".json":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_canonical(frame_to_dict(frame)))
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        for row in frame.vectors:
            fh.write(",".join(format_float(x) for x in row))
            fh.write("\n")
