"""CSV and JSON input/output for series and kernel tables.

Numbers are written with 17 significant digits so that float64 values
survive a write/read round trip exactly.  Output tables always carry a
header row and '\\n' line endings.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .series import validate_series

__all__ = [
    "KINDS",
    "OutputRow",
    "load_series",
    "write_series",
    "table_output_rows",
    "write_output_rows",
    "read_output_rows",
    "write_json_report",
]

KINDS = ("raw", "smoothed", "truth", "ordinary")

_FMT = "%.17g"


@dataclass(frozen=True)
class OutputRow:
    """One (frequency, quantile pair) cell of an emitted kernel table."""

    omega: float
    tau1: float
    tau2: float
    re: float
    im: float
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        for name in ("omega", "tau1", "tau2", "re", "im"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite {name} in output row")


def load_series(path, column=None) -> np.ndarray:
    """Read one numeric column of a CSV file, in file order.

    ``column`` selects by 0-based index (int) or by header name (str);
    None means the first column.  A header row is assumed when the first
    row's selected cell is not numeric.  Any later cell that fails to
    parse aborts with the 1-based file line number.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh)]
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ValueError(f"{path}: empty file")

    col = 0
    start_line = 1
    if isinstance(column, str):
        header = [cell.strip() for cell in rows[0]]
        if column not in header:
            raise ValueError(f"{path}: column {column!r} not found in header {header}")
        col = header.index(column)
        rows = rows[1:]
        start_line = 2
    else:
        if column is not None:
            col = int(column)
        probe = rows[0][col].strip() if col < len(rows[0]) else ""
        try:
            float(probe)
        except ValueError:
            rows = rows[1:]
            start_line = 2

    values = []
    for offset, row in enumerate(rows):
        line = start_line + offset
        if not any(cell.strip() for cell in row):
            continue
        if col >= len(row):
            raise ValueError(f"{path}, line {line}: no column {col}")
        cell = row[col].strip()
        try:
            v = float(cell)
        except ValueError:
            raise ValueError(
                f"{path}, line {line}: could not parse {cell!r} as a number"
            ) from None
        if not math.isfinite(v):
            raise ValueError(f"{path}, line {line}: non-finite value {cell!r}")
        values.append(v)
    if not values:
        raise ValueError(f"{path}: selected column has no data")
    return validate_series(np.array(values, dtype=float))


def write_series(values, fh) -> None:
    """Single-column CSV with a 'value' header."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["value"])
    for v in np.asarray(values, dtype=float):
        w.writerow([_FMT % v])


def table_output_rows(table, kind: str, full_pairs: bool = False) -> list:
    """Flatten a kernel table (periodogram, smoothed, or truth values)
    into OutputRows, quantile pair outermost, frequency innermost.

    With ``full_pairs`` every ordered pair (tau1, tau2) is emitted; the
    transposed pair carries the negated imaginary part, making the
    Hermitian relation visible row by row.  Otherwise only pairs with
    tau1 <= tau2 appear.
    """
    taus = list(table.taus)
    try:
        omegas = np.asarray(table.grid.frequencies, dtype=float)
    except AttributeError:
        omegas = np.asarray(table.omegas, dtype=float)
    if full_pairs:
        ordered = [(t1, t2) for t1 in taus for t2 in taus]
    else:
        ordered = [(t1, t2) for i, t1 in enumerate(taus) for t2 in taus[i:]]
    rows = []
    for t1, t2 in ordered:
        for w, val in zip(omegas, table.pair_values(t1, t2)):
            rows.append(OutputRow(float(w), t1, t2, float(val.real),
                                  float(val.imag), kind))
    return rows


def write_output_rows(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["omega", "tau1", "tau2", "re", "im", "kind"])
    for r in rows:
        w.writerow([_FMT % r.omega, _FMT % r.tau1, _FMT % r.tau2,
                    _FMT % r.re, _FMT % r.im, r.kind])


def read_output_rows(path) -> list:
    """Inverse of write_output_rows, for table round trips in tests."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            OutputRow(float(r["omega"]), float(r["tau1"]), float(r["tau2"]),
                      float(r["re"]), float(r["im"]), r["kind"])
            for r in reader
        ]


def write_json_report(report: dict, fh) -> None:
    json.dump(report, fh, indent=2, sort_keys=True)
    fh.write("\n")
