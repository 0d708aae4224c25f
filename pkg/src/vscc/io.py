"""Delimited-text ingestion and report serialisation."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .data_model import PartialPartition, validate_dataset, Dataset
from .errors import NonNumericColumn, ParseError, UnknownColumn


def ingest_csv(path, label_col: str | None = None, delimiter: str = ",",
               drop: Sequence[str] = ()) -> tuple[Dataset, PartialPartition | None]:
    """Read a header-first delimited file into a dataset and optional labels.

    Every column other than ``label_col`` (and ``drop``) must be numeric.  In
    the label column a blank cell marks an unknown observation; distinct
    non-blank values become groups ``1..G`` in order of first appearance.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter, strict=True))
    except csv.Error as exc:
        raise ParseError(getattr(exc, "line_num", 0) or 0, None, str(exc)) from exc
    except UnicodeDecodeError as exc:
        raise ParseError(0, None, f"not valid UTF-8: {exc}") from exc
    # drop trailing blank lines
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(1, None, "file is empty")
    header = [h.strip() for h in rows[0]]
    if label_col is not None and label_col not in header:
        raise UnknownColumn(label_col)
    for name in drop:
        if name not in header:
            raise UnknownColumn(name)
    width = len(header)
    body = rows[1:]
    for i, row in enumerate(body):
        if len(row) != width:
            raise ParseError(i + 2, None, f"expected {width} fields, found {len(row)}")

    skip = set(drop) | ({label_col} if label_col else set())
    numeric_cols = [j for j, h in enumerate(header) if h not in skip]
    values = np.empty((len(body), len(numeric_cols)))
    for c, j in enumerate(numeric_cols):
        for i, row in enumerate(body):
            cell = row[j].strip()
            try:
                values[i, c] = float(cell)
            except ValueError:
                if cell == "":
                    raise ParseError(i + 2, j + 1, f"empty cell in numeric column {header[j]!r}") from None
                raise NonNumericColumn(header[j]) from None
    ds = validate_dataset(values, [header[j] for j in numeric_cols])

    known = None
    if label_col is not None:
        j = header.index(label_col)
        codes: dict[str, int] = {}
        labels = np.zeros(len(body), dtype=np.int64)
        for i, row in enumerate(body):
            cell = row[j].strip()
            if cell:
                labels[i] = codes.setdefault(cell, len(codes) + 1)
        known = PartialPartition(labels, max(len(codes), 1), tuple(codes))
    return ds, known


def format_float(x: float, digits: int = 6) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.{digits}f}"
