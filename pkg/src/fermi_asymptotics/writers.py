"""CSV, JSON-manifest and SVG output with byte-stable formatting."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .metrics import TimeSeriesRecord

CSV_COLUMNS = ("quantity", "t", "value_re", "value_im", "window_end", "N", "lambda", "beta", "seed")
SWEEP_COLUMNS = (
    "schema_version", "N", "lambda", "window_end", "norm_floor", "norm_floor_ratio",
    "weak_average", "weak_average_ratio", "number_slope", "status", "error",
)
SWEEP_SCHEMA_VERSION = 1


def fmt(x) -> str:
    """Shortest round-trip representation; empty for ``None``."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "0.0" if x == 0 else repr(x)
    return str(x)


def records_to_csv(records, context: dict) -> str:
    """Rows for every record; ``context`` supplies ``N``, ``lambda``, ``beta``, ``seed`` defaults."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        meta = {**context, **rec.metadata}
        for q, t, re, im in rec.rows():
            w.writerow([
                q, fmt(t), fmt(re), fmt(im), fmt(rec.window_end),
                fmt(meta.get("N")), fmt(meta.get("lambda")), fmt(meta.get("beta")), fmt(meta.get("seed")),
            ])
    return buf.getvalue()


def read_series_csv(path) -> list[dict]:
    """Parse and validate a series CSV; raises ``ValueError`` on schema violations."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for line in reader:
            if len(line) != len(CSV_COLUMNS):
                raise ValueError(f"row with {len(line)} fields: {line}")
            row = dict(zip(CSV_COLUMNS, line))
            for key in ("t", "value_re", "value_im"):
                row[key] = float(row[key])
            for key in ("window_end", "lambda", "beta"):
                row[key] = float(row[key]) if row[key] else None
            for key in ("N", "seed"):
                row[key] = int(row[key]) if row[key] else None
            rows.append(row)
    by_q = {}
    for row in rows:
        by_q.setdefault(row["quantity"], []).append(row["t"])
    for q, ts in by_q.items():
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"times of {q!r} are not strictly increasing")
    return rows


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([fmt(row.get(c, SWEEP_SCHEMA_VERSION if c == "schema_version" else None))
                    for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def manifest_json(command: str, config, files: list, derived: dict, windows: dict) -> str:
    body = {
        "command": command,
        "code_version": __version__,
        "config_hash": config.hash,
        "config": {k: v for k, v in config.to_dict().items() if k != "output"} | {
            "output": {k: v for k, v in config.to_dict()["output"].items() if k != "out_dir"}},
        "files": sorted(files),
        "windows": windows,
        "derived": derived,
    }
    return json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n"


def series_svg(rec: TimeSeriesRecord, width: int = 480, height: int = 300, pad: int = 40) -> str:
    """Self-contained line plot of ``|value|`` (or the real value) against ``t``."""
    t = rec.times
    v = rec.values.real if not np.iscomplexobj(rec.values) else np.abs(rec.values)
    t0, t1 = float(t.min()), float(t.max())
    v0, v1 = float(v.min()), float(v.max())
    if t1 == t0:
        t1 = t0 + 1
    if v1 == v0:
        v1 = v0 + 1
    xs = pad + (t - t0) / (t1 - t0) * (width - 2 * pad)
    ys = height - pad - (v - v0) / (v1 - v0) * (height - 2 * pad)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{pts}"/>',
        f'<text x="{width / 2:.0f}" y="{pad / 2:.0f}" text-anchor="middle" font-size="13">{rec.quantity}</text>',
        f'<text x="{pad}" y="{height - pad / 3:.0f}" font-size="10">{t0:.3g}</text>',
        f'<text x="{width - pad}" y="{height - pad / 3:.0f}" text-anchor="end" font-size="10">{t1:.3g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="10">{v0:.3g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="10">{v1:.3g}</text>',
    ]
    if rec.window_end is not None and t0 <= rec.window_end <= t1:
        xw = pad + (rec.window_end - t0) / (t1 - t0) * (width - 2 * pad)
        lines.append(f'<line x1="{xw:.2f}" y1="{pad}" x2="{xw:.2f}" y2="{height - pad}" '
                     'stroke="grey" stroke-dasharray="4 3"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_text(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path.name
