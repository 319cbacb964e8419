"""Tabular export: delimiter-separated text with a header row and a footer
comment, or a JSON document carrying the same content."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from typing import Any, Mapping, Sequence

from . import __version__

TRACE_COLUMNS = ("R0", "R1", "R2", "R1e", "R2e", "provenance", "grid_point")


def config_hash(config: Mapping[str, Any]) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def render(columns: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str = "csv",
           config: Mapping[str, Any] | None = None, grid: str = "", extra: Mapping[str, Any] | None = None) -> str:
    """Render a table; ``config`` is hashed into the footer so runs can be matched."""
    config = dict(config or {})
    footer = {"config_hash": config_hash(config), "grid": grid, "version": __version__}
    rows = [[v.item() if hasattr(v, "item") else v for v in r] for r in rows]
    if fmt == "csv":
        rows = [[_fmt(v) for v in r] for r in rows]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        for k, v in (extra or {}).items():
            buf.write(f"# {k}: {json.dumps(v, sort_keys=True, default=str)}\n")
        buf.write("# " + " ".join(f"{k}={v}" for k, v in footer.items()) + "\n")
        return buf.getvalue()
    if fmt == "doc":
        doc = {"columns": list(columns), "rows": rows, **(dict(extra) if extra else {}), "footer": footer,
               "config": config}
        return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(text: str) -> tuple[list[str], list[list[str]], list[str]]:
    """Split rendered csv text into (header, rows, comment lines)."""
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    comments = [ln for ln in text.splitlines() if ln.startswith("#")]
    rows = list(csv.reader(body))
    return rows[0], rows[1:], comments
