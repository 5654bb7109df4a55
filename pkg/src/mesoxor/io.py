"""CSV output with a one-line provenance header and atomic replacement."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

LABELS = ("00", "01", "10", "11")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header_lines(header: str) -> list[str]:
    return [f"# {line}" for line in header.splitlines()] if header else []


def write_csv(path, columns, rows, header: str = "") -> None:
    lines = _header_lines(header) + [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    atomic_write(path, "\n".join(lines) + "\n")


def write_matrix(path, matrix, header: str = "", row_labels=LABELS, col_labels=LABELS,
                 corner: str = "prev\\next") -> None:
    lines = _header_lines(header) + [",".join([corner, *col_labels])]
    for lab, row in zip(row_labels, np.asarray(matrix)):
        lines.append(",".join([lab, *(fmt(x) for x in row)]))
    atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a file written by :func:`write_csv`; returns (columns, data)."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return cols, data.reshape(len(lines) - 1, len(cols))
