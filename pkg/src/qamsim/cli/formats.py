"""Deterministic on-disk formats: commented CSV and a flat binary grid.

Every file opens with a self-describing header carrying the format
version, the package version, the full canonical config echo, and the
RNG seed, so a file alone suffices to rerun its experiment.  Writers
avoid timestamps and locale-dependent formatting; rerunning the same
config and seed reproduces each output byte for byte.

CSV layout (1D / curve data)::

    # qamsim-csv 1
    # version: <package version>
    # seed: <integer>
    # config: <canonical JSON, sorted keys>
    # columns: <name>,<name>,...
    <row values, comma-separated>

Floats are written with repr-exact precision (%.17g).

Binary grid layout (2D densities), little-endian throughout::

    bytes 0-7    magic b"QAMGRID1"
    bytes 8-11   uint32 header length L
    bytes 12-..  L bytes of UTF-8 canonical JSON with keys:
                   format_version (1), version, seed, config,
                   dims [row axis name, column axis name],
                   axes {name: [values]}, shape [rows, cols]
    then         rows*cols float64 values, C (row-major) order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ConfigError

GRID_MAGIC = b"QAMGRID1"
CSV_FORMAT = "qamsim-csv 1"
GRID_FORMAT_VERSION = 1


def canonical_json(obj) -> str:
    """Stable JSON encoding: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def fmt_value(v) -> str:
    """One CSV cell: repr-exact floats, plain ints and strings."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows,
    config: dict,
    seed: int,
    version: str,
) -> None:
    """Write header + rows; `rows` is an iterable of value sequences."""
    lines = [
        f"# {CSV_FORMAT}",
        f"# version: {version}",
        f"# seed: {seed}",
        f"# config: {canonical_json(config)}",
        f"# columns: {','.join(columns)}",
    ]
    for row in rows:
        if len(row) != len(columns):
            raise ConfigError(
                f"row of {len(row)} values for {len(columns)} columns"
            )
        lines.append(",".join(fmt_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: Path):
    """Return (meta dict, column names, ndarray of float rows).

    Non-numeric cells come back as NaN in the array; the raw string rows
    are included in the meta under 'raw_rows' for text columns.
    """
    meta: dict = {}
    columns: list[str] = []
    raw_rows: list[list[str]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            body = line[2:]
            if body == CSV_FORMAT:
                meta["format"] = body
            elif ": " in body:
                key, val = body.split(": ", 1)
                if key == "config":
                    meta[key] = json.loads(val)
                elif key == "columns":
                    columns = val.split(",")
                elif key == "seed":
                    meta[key] = int(val)
                else:
                    meta[key] = val
            continue
        if line:
            raw_rows.append(line.split(","))
    meta["raw_rows"] = raw_rows
    data = np.full((len(raw_rows), len(columns)), np.nan)
    for i, row in enumerate(raw_rows):
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                pass
    return meta, columns, data


def write_grid(
    path: Path,
    values: np.ndarray,
    dims: Sequence[str],
    axes: dict,
    config: dict,
    seed: int,
    version: str,
) -> None:
    """Write a 2D float64 grid with its named axes."""
    values = np.asarray(values, dtype="<f8")
    if values.ndim != 2:
        raise ConfigError(f"grid payload must be 2D, got shape {values.shape}")
    if len(dims) != 2:
        raise ConfigError(f"grid needs 2 axis names, got {list(dims)}")
    for name, size in zip(dims, values.shape):
        axis = axes.get(name)
        if axis is None or len(axis) != size:
            raise ConfigError(
                f"axis '{name}' missing or wrong length for shape {values.shape}"
            )
    header = {
        "format_version": GRID_FORMAT_VERSION,
        "version": version,
        "seed": seed,
        "config": config,
        "dims": list(dims),
        "axes": {k: [float(x) for x in v] for k, v in axes.items()},
        "shape": list(values.shape),
    }
    blob = canonical_json(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(values).tobytes())


def read_grid(path: Path):
    """Return (header dict, 2D float64 array)."""
    raw = Path(path).read_bytes()
    if raw[:8] != GRID_MAGIC:
        raise ConfigError(f"{path}: not a qamsim grid file")
    (hlen,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    shape = tuple(header["shape"])
    count = shape[0] * shape[1]
    payload = np.frombuffer(
        raw, dtype="<f8", count=count, offset=12 + hlen
    ).reshape(shape)
    return header, payload.copy()
