"""Tabular dataset loading, continuous coding, and normalization.

The VAE consumes a continuous-coded view of the data: one z-scored column per
non-categorical attribute, a z-scored one-hot group per categorical one.
Decoding inverts the z-score and argmax-decodes each one-hot group back to
its allowed value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataLoadError
from .schema import ColumnSpec, Schema, validate_rows


@dataclass(frozen=True)
class NormStats:
    """Per-coded-column mean and standard deviation (population std)."""

    mean: np.ndarray
    std: np.ndarray


class TabularDataset:
    """Immutable rows plus the coding/normalization metadata derived from them."""

    def __init__(self, schema: Schema, rows):
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise DataLoadError("dataset must contain at least one row")
        if rows.shape[1] != len(schema):
            raise DataLoadError(f"expected {len(schema)} columns, got {rows.shape[1]}")
        problems = validate_rows(rows, schema)
        if problems:
            i, name, msg = problems[0]
            raise DataLoadError(msg, row=i + 1, column=name)
        rows.flags.writeable = False
        self.schema = schema
        self.rows = rows

        coded = code_rows(rows, schema)
        mean = coded.mean(axis=0)
        std = coded.std(axis=0)
        if rows.shape[0] == 1:
            # a single row has no spread; normalize against unit std so the
            # round trip stays well defined
            std = np.ones_like(std)
        else:
            flat = np.nonzero(std == 0)[0]
            if flat.size:
                raise DataLoadError("constant column", column=coded_names(schema)[flat[0]])
        self.norm_stats = NormStats(mean=mean, std=std)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def coded_width(self) -> int:
        return int(self.norm_stats.mean.size)


def coded_names(schema: Schema) -> list[str]:
    names = []
    for col in schema:
        if col.kind == "categorical":
            names.extend(f"{col.name}={v:g}" for v in col.values)
        else:
            names.append(col.name)
    return names


def code_rows(rows, schema: Schema) -> np.ndarray:
    """Raw rows -> continuous-coded matrix (one-hot expansion, no scaling)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    blocks = []
    for j, col in enumerate(schema):
        if col.kind == "categorical":
            values = np.asarray(col.values, dtype=np.float64)
            idx = np.argmin(np.abs(rows[:, j, None] - values[None, :]), axis=1)
            onehot = np.zeros((rows.shape[0], values.size))
            onehot[np.arange(rows.shape[0]), idx] = 1.0
            blocks.append(onehot)
        else:
            blocks.append(rows[:, j : j + 1])
    return np.hstack(blocks)


def decode_coded(coded, schema: Schema) -> np.ndarray:
    """Continuous-coded matrix -> raw rows; one-hot groups decode by argmax."""
    coded = np.atleast_2d(np.asarray(coded, dtype=np.float64))
    out = np.empty((coded.shape[0], len(schema)))
    pos = 0
    for j, col in enumerate(schema):
        if col.kind == "categorical":
            values = np.asarray(col.values, dtype=np.float64)
            group = coded[:, pos : pos + values.size]
            out[:, j] = values[np.argmax(group, axis=1)]
            pos += values.size
        else:
            out[:, j] = coded[:, pos]
            pos += 1
    return out


def normalize(ds: TabularDataset) -> np.ndarray:
    """Z-score the coded view; every coded column gets mean 0, std 1."""
    coded = code_rows(ds.rows, ds.schema)
    return (coded - ds.norm_stats.mean) / ds.norm_stats.std


def normalize_rows(ds: TabularDataset, rows) -> np.ndarray:
    """Z-score arbitrary raw rows against the dataset's stats."""
    coded = code_rows(rows, ds.schema)
    return (coded - ds.norm_stats.mean) / ds.norm_stats.std


def denormalize(normed, stats: NormStats, schema: Schema) -> np.ndarray:
    """Invert normalize: un-z-score, then decode the coded view to raw rows."""
    normed = np.atleast_2d(np.asarray(normed, dtype=np.float64))
    coded = normed * stats.std + stats.mean
    return decode_coded(coded, schema)


def _parse_cell(text: str, col: ColumnSpec, row_num: int):
    try:
        value = float(text)
    except ValueError:
        raise DataLoadError(f"unparseable cell {text!r}", row=row_num, column=col.name) from None
    return value


def load_csv(path, schema: Schema) -> TabularDataset:
    """Parse a headered CSV against a schema.

    The header must list exactly the schema's column names in order. Cell
    values are validated against their column kind with row/column
    coordinates on failure (rows numbered from 1, header excluded).
    """
    path = Path(path)
    if not path.exists():
        raise DataLoadError(f"file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataLoadError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if header != schema.names:
            missing = [n for n in schema.names if n not in header]
            if missing:
                raise DataLoadError(f"missing column {missing[0]!r} in header")
            raise DataLoadError(f"header {header} does not match schema columns {schema.names}")
        parsed = []
        for row_num, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(schema):
                raise DataLoadError(f"expected {len(schema)} cells, got {len(row)}", row=row_num)
            parsed.append([_parse_cell(cell.strip(), col, row_num) for cell, col in zip(row, schema)])
    if not parsed:
        raise DataLoadError(f"{path} contains a header but no data rows")
    rows = np.array(parsed, dtype=np.float64)
    problems = validate_rows(rows, schema)
    if problems:
        i, name, msg = problems[0]
        raise DataLoadError(msg, row=i + 1, column=name)
    return TabularDataset(schema, rows)


def save_csv(path, schema: Schema, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.names)
        for row in rows:
            writer.writerow([_format_value(v, col) for v, col in zip(row, schema)])


def _format_value(value: float, col: ColumnSpec) -> str:
    if col.kind in ("integer", "binary") or (col.kind == "categorical" and float(value).is_integer()):
        return str(int(round(value)))
    return f"{value:g}"
