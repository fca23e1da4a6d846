"""Column-typed sample matrix with missing markers and CSV round-tripping.

Missing cells are NaN in memory and empty fields on disk. Discrete columns
hold integer codes in [0, cardinality) and serialize without a decimal
point; continuous cells serialize via repr() so round trips are bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, EmptyDataset, MalformedCsv

TIME_COLUMN = "t"
DOMAIN_COLUMN = "domain"


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str  # "continuous" | "discrete"
    cardinality: int | None = None

    def as_dict(self):
        d = {"name": self.name, "kind": self.kind}
        if self.cardinality is not None:
            d["cardinality"] = self.cardinality
        return d


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    column_meta: list[ColumnMeta]
    domain_index: np.ndarray | None = None
    time_index: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise DimensionMismatch("values must be a 2-D matrix")
        if values.shape[1] != len(self.column_meta):
            raise DimensionMismatch("column_meta length does not match columns")
        if self.domain_index is not None:
            di = np.asarray(self.domain_index, dtype=int)
            object.__setattr__(self, "domain_index", di)
            if di.shape != (values.shape[0],):
                raise DimensionMismatch("domain_index length does not match rows")
        if self.time_index is not None:
            ti = np.asarray(self.time_index, dtype=int)
            object.__setattr__(self, "time_index", ti)
            if ti.shape != (values.shape[0],):
                raise DimensionMismatch("time_index length does not match rows")

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_columns(self):
        return self.values.shape[1]

    @property
    def column_names(self):
        return [m.name for m in self.column_meta]

    @property
    def is_time_series(self):
        return self.time_index is not None

    def column(self, j):
        return self.values[:, j]

    def missing_mask(self):
        return np.isnan(self.values)

    def missing_rate(self):
        if self.values.size == 0:
            return 0.0
        return float(np.isnan(self.values).mean())

    def discrete_ratio(self):
        if not self.column_meta:
            return 0.0
        return sum(m.kind == "discrete" for m in self.column_meta) / len(self.column_meta)

    def with_values(self, values):
        return replace(self, values=values)

    def with_meta(self, column_meta):
        return replace(self, column_meta=column_meta)


def from_matrix(values, names=None, time_index=None):
    values = np.asarray(values, dtype=float)
    if names is None:
        names = [f"X{i}" for i in range(values.shape[1])]
    meta = [ColumnMeta(n, "continuous") for n in names]
    return Dataset(values, meta, time_index=time_index)


def _format_cell(v, kind):
    if np.isnan(v):
        return ""
    if kind == "discrete":
        return str(int(v))
    return repr(float(v))


def to_csv(data):
    """CSV with header; optional leading time column and trailing domain column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = []
    if data.time_index is not None:
        header.append(TIME_COLUMN)
    header.extend(data.column_names)
    if data.domain_index is not None:
        header.append(DOMAIN_COLUMN)
    writer.writerow(header)
    kinds = [m.kind for m in data.column_meta]
    for r in range(data.n_samples):
        row = []
        if data.time_index is not None:
            row.append(str(int(data.time_index[r])))
        row.extend(_format_cell(data.values[r, j], kinds[j]) for j in range(data.n_columns))
        if data.domain_index is not None:
            row.append(str(int(data.domain_index[r])))
        writer.writerow(row)
    return buf.getvalue()


def from_csv(text, column_meta=None):
    """Parse a dataset CSV. Ragged rows raise MalformedCsv with a location."""
    try:
        rows = list(csv.reader(io.StringIO(text)))
    except csv.Error as exc:
        raise MalformedCsv(str(exc)) from exc
    if not rows or not rows[0]:
        raise EmptyDataset("CSV has no header row")
    header = rows[0]
    width = len(header)
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise MalformedCsv(f"row {idx} has {len(row)} fields, expected {width}")
    body = rows[1:]
    if not body:
        raise EmptyDataset("CSV has a header but no data rows")

    has_time = header[0] == TIME_COLUMN
    has_domain = header[-1] == DOMAIN_COLUMN
    start = 1 if has_time else 0
    stop = width - 1 if has_domain else width
    names = header[start:stop]
    if not names:
        raise EmptyDataset("CSV has no data columns")

    n = len(body)
    values = np.full((n, len(names)), np.nan)
    for r, row in enumerate(body):
        for c, cell in enumerate(row[start:stop]):
            if cell != "":
                try:
                    values[r, c] = float(cell)
                except ValueError as exc:
                    raise MalformedCsv(f"row {r + 2}, column {names[c]}: {cell!r}") from exc
    time_index = None
    if has_time:
        try:
            time_index = np.array([int(row[0]) for row in body])
        except ValueError as exc:
            raise MalformedCsv(f"non-integer time index: {exc}") from exc
    domain_index = None
    if has_domain:
        try:
            domain_index = np.array([int(row[-1]) for row in body])
        except ValueError as exc:
            raise MalformedCsv(f"non-integer domain index: {exc}") from exc

    if column_meta is None:
        column_meta = [ColumnMeta(name, "continuous") for name in names]
    elif [m.name for m in column_meta] != names:
        raise MalformedCsv("column_meta names do not match CSV header")
    return Dataset(values, list(column_meta), domain_index, time_index)


def meta_from_json_obj(obj):
    return [
        ColumnMeta(m["name"], m["kind"], m.get("cardinality"))
        for m in obj
    ]


def sidecar_json(data, truth_graphs=None):
    """Sidecar metadata: column kinds plus the ground-truth graph(s)."""
    from . import graphs as g

    obj = {"columns": [m.as_dict() for m in data.column_meta]}
    if data.domain_index is not None:
        obj["has_domain"] = True
    if data.time_index is not None:
        obj["time_series"] = True
    if truth_graphs:
        obj["truth"] = {name: g.graph_to_json_obj(gr) for name, gr in truth_graphs.items()}
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
