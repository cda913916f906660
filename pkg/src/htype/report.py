"""CSV and JSON serialization of sweep reports.

Both formats carry a schema name and version.  Floats are written so they
read back bit-identically: ``%.17g`` in CSV, shortest round-trip ``repr``
in JSON (non-finite values become ``null``).
"""

from __future__ import annotations

import csv
import io
import json
import math

SCHEMA = "htype-sweep"
VERSION = 1
COLUMNS = (
    "n", "m", "t", "x_norm", "z_norm", "d", "p", "q1", "q2", "grad_norm",
    "correction", "ratio", "method", "err_estimate",
)
_INT = {"n", "m"}
_STR = {"method"}
HEADER = f"# {SCHEMA} v{VERSION}"


def report_rows(report) -> list[dict]:
    """One record per grid point; failed points carry ``nan`` values."""
    rows = []
    by_point = iter(report.rows)
    failed = {i for i, _ in report.failures}
    n, m = report.dims
    for i, g in enumerate(report.grid):
        if i in failed:
            rec = dict.fromkeys(COLUMNS, math.nan)
            rec.update(n=n, m=m, t=report.t, x_norm=g.x_norm, z_norm=g.z_norm, method="failed")
            rows.append(rec)
        else:
            rows.append(next(by_point))
    return rows


def _fmt(key, value) -> str:
    if key in _STR:
        return str(value)
    if key in _INT:
        return str(int(value))
    return format(float(value), ".17g")


def format_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(k, row[k]) for k in COLUMNS])
    return buf.getvalue()


def _json_value(key, value):
    if key in _STR:
        return str(value)
    if key in _INT:
        return int(value)
    value = float(value)
    return value if math.isfinite(value) else None


def format_json(rows, config: dict | None = None, summary: dict | None = None) -> str:
    doc = {
        "schema": SCHEMA,
        "version": VERSION,
        "columns": list(COLUMNS),
        "config": config or {},
        "summary": {k: _json_value("", v) if isinstance(v, float) else v
                    for k, v in (summary or {}).items()},
        "rows": [{k: _json_value(k, row[k]) for k in COLUMNS} for row in rows],
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _typed(key, text):
    if key in _STR:
        return text
    if key in _INT:
        return int(text)
    return float(text)


def parse_sweep(text: str) -> list[dict]:
    """Read rows back from either output format, checking the schema."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA or doc.get("version") != VERSION:
            raise ValueError("not an htype sweep document of a supported version")
        if tuple(doc["columns"]) != COLUMNS:
            raise ValueError("unexpected columns")
        rows = []
        for rec in doc["rows"]:
            if set(rec) != set(COLUMNS):
                raise ValueError("row does not match the column set")
            rows.append({k: (math.nan if rec[k] is None else _typed(k, rec[k])) for k in COLUMNS})
        return rows
    lines = text.splitlines()
    if not lines or lines[0] != HEADER:
        raise ValueError(f"missing header line {HEADER!r}")
    reader = csv.reader(lines[1:])
    cols = tuple(next(reader))
    if cols != COLUMNS:
        raise ValueError("unexpected columns")
    return [{k: _typed(k, v) for k, v in zip(COLUMNS, rec)} for rec in reader]
