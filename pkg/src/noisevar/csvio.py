"""CSV reading and writing with a pinned, byte-stable layout.

Header row is mandatory, ``.`` is the decimal separator, rows end with a
bare line feed, floats are written with ``repr`` (shortest round-trip form)
and missing values are empty fields.
"""

from __future__ import annotations

import csv
import io
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError


@dataclass
class Measurements:
    y: np.ndarray
    x: np.ndarray | None = None
    r_true: np.ndarray | None = None
    t: np.ndarray | None = None


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    return "" if math.isnan(f) else repr(f)


def format_table(columns: dict[str, object]) -> str:
    """Render equal-length columns as CSV text."""
    names = list(columns)
    data = [columns[n] for n in names]
    lengths = {len(c) for c in data}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*data):
        writer.writerow([v if isinstance(v, str) else _cell(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str | bytes) -> None:
    """Write ``text`` to ``path`` atomically; ``-`` means standard output."""
    data = text.encode() if isinstance(text, str) else text
    if str(path) == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _parse_float(raw: str, row: int, name: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"row {row}: column {name!r} value {raw!r} is not a number", row) from None
    if not math.isfinite(value):
        raise InputError(f"row {row}: column {name!r} value {raw!r} is not finite", row)
    return value


def read_measurements(path) -> Measurements:
    """Load ``y`` (required) and optional ``x``, ``r_true`` and ``t`` columns.

    Row numbers in error messages count the header as row 1.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if "y" not in header:
            raise InputError(f"{path}: no 'y' column in header {header}")
        wanted = [c for c in ("y", "x", "r_true", "t") if c in header]
        pos = {c: header.index(c) for c in wanted}
        cols = {c: [] for c in wanted}
        for row_no, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(f"row {row_no}: expected {len(header)} fields, got {len(row)}", row_no)
            for c in wanted:
                cols[c].append(_parse_float(row[pos[c]], row_no, c))
    if not cols["y"]:
        raise InputError(f"{path}: no data rows")
    arr = {c: np.array(v) for c, v in cols.items()}
    return Measurements(y=arr["y"], x=arr.get("x"), r_true=arr.get("r_true"), t=arr.get("t"))
