"""Tabular output: CSV and schema-versioned JSON.

Floats are written with ``repr`` (shortest string that round-trips, which is
never fewer significant digits than the value carries).  Infinities and NaN
are written as the strings ``inf``, ``-inf`` and ``nan`` in both formats.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .metrics import SpectrumRecord

TABLE_SCHEMA = "omniport.table/1"


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple
    axes: tuple = ()  # ((name, (values...)), ...)
    scenario_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        object.__setattr__(
            self, "axes", tuple((str(n), tuple(float(v) for v in vals)) for n, vals in self.axes)
        )
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} fields, expected {len(self.columns)}")

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _json_value(value):
    if isinstance(value, (bool, int)) or value is None:
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _from_json_value(value):
    if isinstance(value, str):
        if value in ("inf", "-inf", "nan"):
            return float(value)
        raise ValueError(f"unexpected string {value!r} in table")
    return value


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    doc = {
        "schema": TABLE_SCHEMA,
        "scenario_hash": table.scenario_hash,
        "axes": [{"name": n, "values": list(vals)} for n, vals in table.axes],
        "columns": list(table.columns),
        "records": [
            {c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows
        ],
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def from_json(text: str) -> Table:
    doc = json.loads(text)
    if doc.get("schema") != TABLE_SCHEMA:
        raise ValueError(f"unsupported table schema {doc.get('schema')!r}")
    columns = tuple(doc["columns"])
    rows = tuple(tuple(_from_json_value(rec[c]) for c in columns) for rec in doc["records"])
    axes = tuple((a["name"], tuple(a["values"])) for a in doc["axes"])
    return Table(columns, rows, axes, doc["scenario_hash"])


def from_csv(text: str) -> Table:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for line in reader:
        row = []
        for cell in line:
            if cell in ("true", "false"):
                row.append(cell == "true")
            elif cell == "":
                row.append(None)
            else:
                row.append(float(cell))
        rows.append(tuple(row))
    return Table(tuple(header), tuple(rows))


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown format {fmt!r}")


def emit(table: Table, fmt: str, path: Optional[str | Path] = None) -> str:
    """Render ``table`` and write it to ``path`` (stdout when ``path`` is None or "-")."""
    text = render(table, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
    return text


def spectrum_table(
    records: Sequence[SpectrumRecord],
    columns: Sequence[str] = ("xi", "T_fwd", "T_bwd"),
    scenario_hash: str = "",
) -> Table:
    """Table of spectrum records; ``S1``..``SN`` address output energies."""
    def value(rec: SpectrumRecord, col: str):
        if col.startswith("S") and col[1:].isdigit():
            return rec.S[int(col[1:]) - 1]
        if col == "log10_I":
            return math.inf if rec.I == math.inf else (math.log10(rec.I) if rec.I > 0 else -math.inf)
        return getattr(rec, col)

    rows = [tuple(value(r, c) for c in columns) for r in records]
    axes = (("xi", tuple(r.xi for r in records)),)
    return Table(tuple(columns), tuple(rows), axes, scenario_hash)


def record_columns(n_ports: int) -> tuple:
    return ("xi", "T_fwd", "T_bwd", "I") + tuple(f"S{j}" for j in range(1, n_ports + 1)) + ("b_abs2",)


def sweep_table(table, scenario_hash: str = "") -> Table:
    """Flatten a :class:`~omniport.sweep.SweepTable`; ``record`` metrics expand to all fields."""
    axis_cols = tuple(a.column for a in table.axes)
    cols: list[str] = list(axis_cols)
    expanders = []
    for m in table.metrics:
        if m == "record":
            n = len(table.records[0][table.metrics.index(m)].S) if table.records else 0
            rc = record_columns(n)
            cols.extend(f"{c}" for c in rc)
            expanders.append(lambda rec, rc=rc: [
                rec.S[int(c[1:]) - 1] if c.startswith("S") and c[1:].isdigit() else getattr(rec, c)
                for c in rc
            ])
        else:
            cols.append(m)
            expanders.append(lambda v: [v])
    rows = []
    for coords, rec in zip(table.coordinates(), table.records):
        row = list(coords)
        for expand, value in zip(expanders, rec):
            row.extend(expand(value))
        rows.append(tuple(row))
    axes = tuple((a.column, a.values) for a in table.axes)
    return Table(tuple(cols), tuple(rows), axes, scenario_hash)
