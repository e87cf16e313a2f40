"""Typed column schemas for tabular datasets, plus the post-generation rounding rule.

A schema is an external JSON document (a list of column objects) so new
tabular datasets need no code changes. Allowed values for binary/categorical
columns must be numeric; rounding snaps by numeric distance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError

KINDS = ("continuous", "integer", "stepped", "binary", "categorical")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    step: float | None = None
    allowed_values: tuple[float, ...] | None = None
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise SchemaError("column name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "stepped":
            if self.step is None or not (self.step > 0):
                raise SchemaError(f"column {self.name!r}: stepped kind needs step > 0")
        elif self.step is not None:
            raise SchemaError(f"column {self.name!r}: step only valid for stepped kind")
        if self.allowed_values is not None:
            if self.kind not in ("binary", "categorical"):
                raise SchemaError(f"column {self.name!r}: allowed_values only valid for binary/categorical")
            if len(self.allowed_values) == 0:
                raise SchemaError(f"column {self.name!r}: allowed_values must be non-empty")
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in self.allowed_values):
                raise SchemaError(f"column {self.name!r}: allowed_values must be numeric")
        if self.kind == "categorical" and self.allowed_values is None:
            raise SchemaError(f"column {self.name!r}: categorical kind needs allowed_values")

    @property
    def values(self) -> tuple[float, ...]:
        """Concrete value set: declared allowed_values, or {0, 1} for binary."""
        if self.allowed_values is not None:
            return self.allowed_values
        return (0.0, 1.0)


class Schema:
    """Ordered list of column specs with unique names."""

    def __init__(self, columns):
        columns = list(columns)
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate column names: {dupes}")
        self.columns = columns

    def __len__(self):
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __getitem__(self, i):
        return self.columns[i]

    @property
    def names(self):
        return [c.name for c in self.columns]

    def to_obj(self):
        out = []
        for c in self.columns:
            entry = {"name": c.name, "kind": c.kind}
            if c.step is not None:
                entry["step"] = c.step
            if c.allowed_values is not None:
                entry["allowed_values"] = list(c.allowed_values)
            if c.unit:
                entry["unit"] = c.unit
            out.append(entry)
        return out

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_obj(), indent=2) + "\n")

    @classmethod
    def from_obj(cls, obj) -> "Schema":
        if not isinstance(obj, list) or not obj:
            raise SchemaError("schema document must be a non-empty JSON list")
        cols = []
        for entry in obj:
            if not isinstance(entry, dict):
                raise SchemaError(f"schema entries must be objects, got {type(entry).__name__}")
            unknown = set(entry) - {"name", "kind", "step", "allowed_values", "unit"}
            if unknown:
                raise SchemaError(f"unknown schema fields: {sorted(unknown)}")
            av = entry.get("allowed_values")
            cols.append(
                ColumnSpec(
                    name=entry.get("name", ""),
                    kind=entry.get("kind", ""),
                    step=entry.get("step"),
                    allowed_values=tuple(av) if av is not None else None,
                    unit=entry.get("unit", ""),
                )
            )
        return cls(cols)

    @classmethod
    def load(cls, path) -> "Schema":
        path = Path(path)
        if not path.exists():
            raise SchemaError(f"schema file not found: {path}")
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise SchemaError(f"schema file {path} is not valid JSON: {e}") from e
        return cls.from_obj(obj)


def _round_half_away(x):
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def round_column(value: float, col: ColumnSpec) -> float:
    """Snap a single denormalized value to its column's kind."""
    if col.kind == "continuous":
        return float(value)
    if col.kind == "integer":
        return float(_round_half_away(value))
    if col.kind == "stepped":
        return float(col.step * _round_half_away(value / col.step))
    # binary and categorical snap to the nearest member of the value set
    values = np.asarray(col.values, dtype=np.float64)
    return float(values[np.argmin(np.abs(values - value))])


def round_discrete(raw, schema: Schema) -> np.ndarray:
    """Apply the per-kind rounding rule to a raw-unit row or matrix.

    Integers round half away from zero, stepped columns snap to the nearest
    step multiple, binary/categorical snap to the nearest allowed value
    (first match wins on exact ties). Idempotent.
    """
    arr = np.asarray(raw, dtype=np.float64)
    single = arr.ndim == 1
    rows = np.atleast_2d(arr).copy()
    if rows.shape[1] != len(schema):
        raise SchemaError(f"expected {len(schema)} columns, got {rows.shape[1]}")
    for j, col in enumerate(schema.columns):
        if col.kind == "continuous":
            continue
        if col.kind == "integer":
            rows[:, j] = _round_half_away(rows[:, j])
        elif col.kind == "stepped":
            rows[:, j] = col.step * _round_half_away(rows[:, j] / col.step)
        else:
            values = np.asarray(col.values, dtype=np.float64)
            idx = np.argmin(np.abs(rows[:, j, None] - values[None, :]), axis=1)
            rows[:, j] = values[idx]
    return rows[0] if single else rows


def validate_rows(rows, schema: Schema, atol: float = 1e-9):
    """Check every cell against its column kind; returns a list of (row, column, message)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    problems = []
    for j, col in enumerate(schema.columns):
        vals = rows[:, j]
        if col.kind == "continuous":
            bad = ~np.isfinite(vals)
            msg = "non-finite value"
        elif col.kind == "integer":
            bad = np.abs(vals - np.round(vals)) > atol
            msg = "not an integer"
        elif col.kind == "stepped":
            bad = np.abs(vals / col.step - np.round(vals / col.step)) > atol / col.step
            msg = f"not a multiple of {col.step}"
        else:
            values = np.asarray(col.values, dtype=np.float64)
            bad = np.min(np.abs(vals[:, None] - values[None, :]), axis=1) > atol
            msg = "not an allowed value"
        for i in np.nonzero(bad)[0]:
            problems.append((int(i), col.name, f"{msg}: {vals[i]!r}"))
    return problems
