"""Bit-stable CSV and JSON rendering of report records."""

from __future__ import annotations

import json
import math
import os
import sys
import tempfile
from pathlib import Path

from .run import ReportRecord

__all__ = ["HEADER", "render_csv", "render_json", "emit"]

HEADER = "strategy,n,value_re,value_im,estimate_re,estimate_im,bound"


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _csv_field(s: str) -> str:
    if any(ch in s for ch in ',"\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def render_csv(report: ReportRecord) -> str:
    lines = [HEADER]
    for strategy, n, value, estimate, bound in report.rows:
        lines.append(",".join([
            _csv_field(strategy), str(int(n)),
            _f(value.real), _f(value.imag), _f(estimate.real), _f(estimate.imag), _f(bound),
        ]))
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else _f(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def render_json(report: ReportRecord) -> str:
    rows = [
        {"strategy": s, "n": int(n), "value_re": v.real, "value_im": v.imag,
         "estimate_re": e.real, "estimate_im": e.imag, "bound": b}
        for s, n, v, e, b in report.rows
    ]
    doc = {"command": report.command, "summary": report.summary, "rows": rows}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def emit(report: ReportRecord, format: str = "csv", path=None) -> None:
    """Write the report; ``path=None`` writes to standard output.  Files
    are replaced atomically."""
    if format == "csv":
        text = render_csv(report)
    elif format == "json":
        text = render_json(report)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
