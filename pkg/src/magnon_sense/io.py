"""Deterministic CSV/JSON table envelopes.

CSV dialect: comma separators, `.` decimals, `#`-prefixed metadata header
lines, and shortest round-trip float formatting (repr).  Files are written
atomically (temp file + rename).  The numeric payload of two runs with the
same config and seed is byte-identical; only the timestamp line may differ.
"""

from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError
from .series import SpectrumSeries

_FMT_CSV = "csv"
_FMT_JSON = "json"


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_table(path: str, columns: list, rows, metadata: dict | None = None,
                fmt: str = _FMT_CSV) -> str:
    """Write a rectangular numeric table with metadata; returns the path."""
    metadata = dict(metadata or {})
    data = np.atleast_2d(np.asarray(rows, dtype=float))
    if data.size and data.shape[1] != len(columns):
        raise ConfigError(f"row width {data.shape[1]} does not match {len(columns)} columns")
    if fmt == _FMT_CSV:
        lines = [f"# {key}: {value}" for key, value in metadata.items()]
        lines.append(f"# timestamp: {timestamp()}")
        lines.append(",".join(columns))
        for row in data:
            lines.append(",".join(_format_value(v) for v in row))
        _atomic_write(path, "\n".join(lines) + "\n")
    elif fmt == _FMT_JSON:
        payload = {
            "metadata": {**metadata, "timestamp": timestamp()},
            "columns": list(columns),
            "rows": [[float(v) for v in row] for row in data],
        }
        _atomic_write(path, json.dumps(payload, indent=1, sort_keys=False) + "\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    return path


def read_table(path: str):
    """Read a table written by `write_table`; returns (metadata, columns, array)."""
    metadata = {}
    if path.endswith(".json"):
        with open(path) as handle:
            payload = json.load(handle)
        return payload.get("metadata", {}), payload["columns"], \
            np.asarray(payload["rows"], dtype=float)
    columns = None
    rows = []
    with open(path) as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    metadata[key.strip()] = value.strip()
                continue
            if columns is None:
                columns = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    if columns is None:
        raise ConfigError(f"no header row found in {path}")
    return metadata, columns, np.asarray(rows, dtype=float)


SPECTRUM_BASE_COLUMNS = ("omega_rad_per_s", "psd")


def write_spectrum(path: str, series: SpectrumSeries, metadata: dict | None = None,
                   fmt: str = _FMT_CSV) -> str:
    """Serialize a spectrum with its component breakdown as extra columns."""
    metadata = dict(metadata or {})
    metadata.setdefault("channel", series.channel)
    metadata.setdefault("units", series.units)
    columns = list(SPECTRUM_BASE_COLUMNS)
    arrays = [series.omega, series.values]
    for name in sorted(series.components):
        columns.append(name)
        arrays.append(series.components[name])
    if series.stderr is not None:
        columns.append("stderr")
        arrays.append(series.stderr)
    return write_table(path, columns, np.column_stack(arrays), metadata, fmt)


def read_spectrum(path: str) -> SpectrumSeries:
    """Load a spectrum written by `write_spectrum` (or externally, matching the
    documented schema: omega_rad_per_s and psd columns required)."""
    metadata, columns, data = read_table(path)
    if data.size == 0:
        raise ConfigError(f"spectrum file {path} contains no rows")
    try:
        i_omega = columns.index("omega_rad_per_s")
        i_psd = columns.index("psd")
    except ValueError as exc:
        raise ConfigError(f"spectrum file {path} lacks required column: {exc}")
    components = {}
    stderr = None
    for j, name in enumerate(columns):
        if j in (i_omega, i_psd):
            continue
        if name == "stderr":
            stderr = data[:, j]
        else:
            components[name] = data[:, j]
    return SpectrumSeries(
        omega=data[:, i_omega], values=data[:, i_psd],
        channel=metadata.get("channel", "x"),
        units=metadata.get("units", "tesla2_per_hertz"),
        components=components, stderr=stderr)
