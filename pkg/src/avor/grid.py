"""Regular 2D grids and scalar fields on them.

A grid cell (i, j) has its center at (origin_x + i*res, origin_y + j*res).
Field values are stored in a (nx, ny) float64 array, so axis 0 runs along x
and axis 1 along y.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError

BINARY_MAGIC = b"AVGF1"


@dataclass(frozen=True)
class GridSpec:
    origin_x: float
    origin_y: float
    res: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.res <= 0:
            raise ValueError("grid resolution must be positive")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid must have at least 2x2 cells")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, Y) arrays of shape (nx, ny) with cell-center coordinates."""
        xs = self.origin_x + self.res * np.arange(self.nx)
        ys = self.origin_y + self.res * np.arange(self.ny)
        return np.meshgrid(xs, ys, indexing="ij")

    def index_of(self, x: float, y: float) -> tuple[int, int] | None:
        """Index of the cell containing (x, y), or None if outside the grid."""
        i = int(np.rint((x - self.origin_x) / self.res))
        j = int(np.rint((y - self.origin_y) / self.res))
        if 0 <= i < self.nx and 0 <= j < self.ny:
            return i, j
        return None

    def contains(self, x: float, y: float) -> bool:
        return self.index_of(x, y) is not None


@dataclass(frozen=True)
class GridField:
    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.spec.nx, self.spec.ny):
            raise ValueError(
                f"field shape {v.shape} does not match grid "
                f"({self.spec.nx}, {self.spec.ny})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(v < 0):
            raise ValueError("field values must be non-negative")
        object.__setattr__(self, "values", v)

    def same_spec(self, other: "GridField") -> bool:
        return self.spec == other.spec


def require_same_spec(a: GridField, b: GridField) -> None:
    if not a.same_spec(b):
        raise GridMismatchError(f"grid specs differ: {a.spec} vs {b.spec}")


def write_csv(fld: GridField, path) -> None:
    """Row-major CSV dump; the header line carries the grid spec."""
    s = fld.spec
    header = f"origin_x={s.origin_x},origin_y={s.origin_y},res={s.res},nx={s.nx},ny={s.ny}"
    np.savetxt(path, fld.values, delimiter=",", header=header)


_SPEC_FMT = "<dddII"  # little-endian: origin_x, origin_y, res, nx, ny


def write_binary(fld: GridField, path) -> None:
    """Compact dump: magic, little-endian spec, then float64 values row-major."""
    s = fld.spec
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack(_SPEC_FMT, s.origin_x, s.origin_y, s.res, s.nx, s.ny))
        fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())


def read_binary(path) -> GridField:
    with open(path, "rb") as fh:
        magic = fh.read(len(BINARY_MAGIC))
        if magic != BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}")
        ox, oy, res, nx, ny = struct.unpack(_SPEC_FMT, fh.read(struct.calcsize(_SPEC_FMT)))
        raw = fh.read(8 * nx * ny)
        values = np.frombuffer(raw, dtype="<f8").reshape(nx, ny).copy()
    return GridField(GridSpec(ox, oy, res, nx, ny), values)
