"""Structured experiment outputs: ratio tables, norm reports, field dumps.

CSV emission is deterministic: fixed column order, 12-significant-digit
decimal formatting, LF line endings.  Field dumps use a small binary
format (magic "OSCF") holding the grid geometry and interleaved re/im
float64 samples in row-major order, little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .grid import Field, make_grid

FIELD_MAGIC = b"OSCF"
FIELD_VERSION = 1


@dataclass(frozen=True)
class RatioTable:
    """Rows of measured ratios/constants with named columns."""

    columns: tuple[str, ...]
    rows: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        rows = tuple(tuple(r) for r in self.rows)
        for r in rows:
            if len(r) != len(self.columns):
                raise ValueError("row width does not match the column count")
        object.__setattr__(self, "rows", rows)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.asarray([r[i] for r in self.rows], dtype=float)


@dataclass(frozen=True)
class NormReport:
    """Named measured values (norms, empirical constants, slopes)."""

    entries: tuple = ()  # sequence of (name, value)

    def as_dict(self) -> dict:
        return dict(self.entries)


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def emit_ratio_table(table: RatioTable, path) -> str:
    """Write the table as CSV; returns the path written."""
    if not table.rows:
        raise ValueError("refusing to emit an empty ratio table")
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_format_value(v) for v in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return str(path)


def read_ratio_table(path) -> RatioTable:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    cols = tuple(lines[0].split(","))
    rows = [tuple(float(tok) for tok in ln.split(",")) for ln in lines[1:]]
    return RatioTable(columns=cols, rows=rows)


def write_field_dump(f: Field, path) -> str:
    g = f.grid
    phys = f.to("physical").samples
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<I", FIELD_VERSION))
        fh.write(struct.pack("<I", g.dim))
        for _ in range(g.dim):
            fh.write(struct.pack("<I", g.points_per_dim))
        fh.write(struct.pack("<d", g.half_width))
        inter = np.empty(2 * phys.size)
        inter[0::2] = np.real(phys).reshape(-1)
        inter[1::2] = np.imag(phys).reshape(-1)
        fh.write(inter.astype("<f8").tobytes())
    return str(path)


def read_field_dump(path) -> Field:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FIELD_MAGIC:
            raise ValueError(f"not a field dump (magic {magic!r})")
        version = struct.unpack("<I", fh.read(4))[0]
        if version != FIELD_VERSION:
            raise ValueError(f"unsupported field dump version {version}")
        n = struct.unpack("<I", fh.read(4))[0]
        gs = [struct.unpack("<I", fh.read(4))[0] for _ in range(n)]
        if len(set(gs)) != 1:
            raise ValueError("anisotropic grids are not supported")
        L = struct.unpack("<d", fh.read(8))[0]
        grid = make_grid(n, gs[0], L)
        raw = np.frombuffer(fh.read(), dtype="<f8")
    samples = (raw[0::2] + 1j * raw[1::2]).reshape(grid.shape)
    return Field(grid=grid, representation="physical", samples=samples)


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
