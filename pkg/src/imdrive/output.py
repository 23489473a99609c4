"""Plain-text artifacts: trace CSV, metrics key-value files, run manifest, Bode and steady-state tables."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from imdrive.simulation import TRACE_FIELDS, Trace

BODE_COLUMNS = ("omega_rad_s", "tol_mag_db", "tol_phase_deg", "tcl_mag_db", "tcl_phase_deg")
INT_COLUMNS = {"s_a", "s_b", "s_c", "overmod"}


def fmt(x) -> str:
    """Nine significant digits; integers and booleans stay integral."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def emit_trace_csv(trace: Trace, path) -> Path:
    path = Path(path)
    cols = [trace[name] for name in TRACE_FIELDS]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])
    return path


def read_trace_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, r)) for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    out = {name: arr[:, i] for i, name in enumerate(header)}
    for name in INT_COLUMNS & set(out):
        out[name] = out[name].astype(np.int8)
    if "overmod" in out:
        out["overmod"] = out["overmod"].astype(bool)
    return out


def emit_metrics(metrics, path) -> Path:
    """Write ``key = value`` lines. Accepts a :class:`Metrics` or a flat mapping."""
    flat = metrics.as_flat_dict() if hasattr(metrics, "as_flat_dict") else dict(metrics)
    path = Path(path)
    path.write_text("".join(f"{k} = {fmt(v)}\n" for k, v in flat.items()))
    return path


def read_metrics(path) -> dict[str, float]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            k, v = line.split("=", 1)
            out[k.strip()] = float(v)
    return out


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(value.item())
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def emit_manifest(manifest: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(manifest), indent=2) + "\n")
    return path


def emit_table_csv(columns, rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def emit_bode_csv(table, path) -> Path:
    rows = [(ol.omega, ol.magnitude_db, ol.phase_deg, cl.magnitude_db, cl.phase_deg) for ol, cl in table]
    return emit_table_csv(BODE_COLUMNS, rows, path)
