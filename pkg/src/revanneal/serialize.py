"""Bit-stable result serialization: CSV / JSON-lines tables and the manifest.

Floating-point values are printed with 17 significant digits so that parsing
them back reproduces the exact double.
"""

from __future__ import annotations

import json
import os

__all__ = ["format_value", "write_csv", "write_jsonl", "write_manifest", "write_tables"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _rows(table: dict):
    cols = list(table.keys())
    n = len(table[cols[0]]) if cols else 0
    for c in cols:
        if len(table[c]) != n:
            raise ValueError(f"ragged table: column {c!r} has {len(table[c])} rows, expected {n}")
    for i in range(n):
        yield {c: table[c][i] for c in cols}


def write_csv(path: str, table: dict) -> None:
    cols = list(table.keys())
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in _rows(table):
            fh.write(",".join(format_value(row[c]) for c in cols) + "\n")


def write_jsonl(path: str, table: dict) -> None:
    with open(path, "w") as fh:
        for row in _rows(table):
            fh.write(json.dumps({k: _json_value(v) for k, v in row.items()}) + "\n")


def _json_value(v):
    if isinstance(v, float):
        return float(v)
    if hasattr(v, "item"):
        return v.item()
    return v


def write_manifest(path: str, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_value)
        fh.write("\n")


def write_tables(out_dir: str, tables: dict, fmt: str = "csv") -> list[str]:
    """Write every named table; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, table in tables.items():
        ext = "csv" if fmt == "csv" else "jsonl"
        path = os.path.join(out_dir, f"{name}.{ext}")
        (write_csv if fmt == "csv" else write_jsonl)(path, table)
        paths.append(path)
    return paths
