"""CSV and JSON serialization of traces, sweeps, and run manifests."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

from .errors import BatteryError

TRACE_HEADER = ("tau", "W_per_spin", "P_per_spin", "W_total", "P_total")
SWEEP_HEADER = ("axis", "p_max_per_spin", "tau_star", "W_at_tau_star_per_spin", "status")
CSV_SCHEMA_VERSION = 1


class OutputError(BatteryError, OSError):
    """Failure writing or reading an output file."""


def format_float(value) -> str:
    """Shortest decimal string that round-trips to the same double."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else format_float(c) for c in row])
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def write_csv(path, header, rows) -> Path:
    return write_text(path, _render_csv(header, rows))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise OutputError(f"{path} is empty")
    return rows[0], rows[1:]


def trace_rows(trace):
    L = trace.L
    for tau, w, p in zip(trace.taus, trace.work, trace.power):
        yield (tau, w / L, p / L, w, p)


def emit_trace_csv(trace, path) -> Path:
    """One row per grid time: ``tau,W_per_spin,P_per_spin,W_total,P_total``."""
    return write_csv(path, TRACE_HEADER, trace_rows(trace))


def read_trace_csv(path) -> list[tuple[float, ...]]:
    header, rows = read_csv(path)
    if tuple(header) != TRACE_HEADER:
        raise OutputError(f"{path}: unexpected trace header {header}")
    return [tuple(float(c) for c in row) for row in rows]


def sweep_rows(result):
    for p in result.points:
        yield (p.axis, p.p_max_per_spin, p.tau_star, p.w_at_tau_star_per_spin, p.status)


def emit_sweep_csv(result, path) -> Path:
    return write_csv(path, SWEEP_HEADER, sweep_rows(result))


def read_sweep_csv(path) -> list[tuple]:
    header, rows = read_csv(path)
    if tuple(header) != SWEEP_HEADER:
        raise OutputError(f"{path}: unexpected sweep header {header}")
    return [tuple(float(c) for c in row[:4]) + (row[4],) for row in rows]


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path, obj) -> Path:
    return write_text(path, dump_json(obj))
