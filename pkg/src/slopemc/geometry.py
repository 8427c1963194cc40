"""Slope geometry and the active-cell grid.

The soil body is a staircase approximation of a slope cross-section:
a horizontal crest bench, an inclined face, a horizontal toe bench,
all sitting on a rigid base. The body is discretised into square cells;
a cell is active when its center lies strictly below the ground-surface
polyline. Active cells are ordered row-major from the top row down,
left to right, and that ordering (hashed into dataset manifests) is what
makes feature vectors comparable across samples.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Tolerance (m) for divisibility checks and strict-interior tests.
GEOM_EPS = 1e-9


@dataclass(frozen=True)
class SlopeGeometry:
    """Cross-section of the slope, all lengths in meters.

    ``foundation_depth`` is measured from the crest surface to the rigid
    base. ``slope_height`` may be zero, which degenerates to a rectangular
    body (no cut). ``origin`` anchors the lower-left corner of the domain.
    """

    slope_angle: float = 45.0
    slope_height: float = 5.0
    foundation_depth: float = 10.0
    crest_extent: float = 10.0
    toe_extent: float = 12.5
    unit_weight: float = 20.0
    cell_size: float = 0.5
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not 0.0 < self.slope_angle < 90.0:
            raise ValueError("slope_angle must be in (0, 90) degrees")
        if self.slope_height < 0:
            raise ValueError("slope_height must be non-negative")
        if self.foundation_depth < self.slope_height or self.foundation_depth <= 0:
            raise ValueError("foundation_depth must be >= slope_height and positive")
        if self.crest_extent < 0 or self.toe_extent < 0:
            raise ValueError("extents must be non-negative")
        if self.unit_weight <= 0:
            raise ValueError("unit_weight must be positive")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")

    @property
    def slope_run(self) -> float:
        """Horizontal extent of the inclined face, snapped to whole cells."""
        if self.slope_height == 0.0:
            return 0.0
        run = self.slope_height / math.tan(math.radians(self.slope_angle))
        return _snap_cells(run, self.cell_size, "slope run") * self.cell_size

    @property
    def width(self) -> float:
        return self.crest_extent + self.slope_run + self.toe_extent

    @property
    def crest_level(self) -> float:
        return self.origin[1] + self.foundation_depth

    @property
    def toe_level(self) -> float:
        return self.origin[1] + self.foundation_depth - self.slope_height

    @property
    def base_level(self) -> float:
        return self.origin[1]

    def surface_elevation(self, x):
        """Ground-surface polyline elevation at horizontal position ``x``."""
        x = np.asarray(x, dtype=np.float64)
        x0 = self.origin[0]
        run = self.slope_run
        face_start = x0 + self.crest_extent
        face_end = face_start + run
        y = np.full_like(x, self.crest_level)
        if run > 0.0:
            grade = self.slope_height / run
            on_face = (x > face_start) & (x < face_end)
            y = np.where(on_face, self.crest_level - (x - face_start) * grade, y)
        y = np.where(x >= face_end, self.toe_level, y)
        return y if y.ndim else float(y)

    def to_dict(self) -> dict:
        return {
            "slope_angle": self.slope_angle,
            "slope_height": self.slope_height,
            "foundation_depth": self.foundation_depth,
            "crest_extent": self.crest_extent,
            "toe_extent": self.toe_extent,
            "unit_weight": self.unit_weight,
            "cell_size": self.cell_size,
            "origin": list(self.origin),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SlopeGeometry":
        d = dict(d)
        if "origin" in d:
            d["origin"] = tuple(d["origin"])
        return cls(**d)


def _snap_cells(length: float, cell: float, what: str) -> int:
    """Number of whole cells in ``length``; reject non-divisible extents."""
    k = round(length / cell)
    if abs(length - k * cell) > 1e-6 * max(1.0, cell):
        raise ValueError(f"{what} ({length} m) is not a whole number of {cell} m cells")
    return int(k)


@dataclass(frozen=True)
class CellGrid:
    """Active cells of the discretised soil body.

    ``centers`` lists active cell centers (x, y) in the frozen row-major
    order (top row first, x ascending). ``cell_index`` maps (row, col) to
    the position in that order (-1 for excavated cells; row 0 at the
    base), and ``surf_top`` holds the staircase soil-top elevation per
    column. All arrays are read-only and safe to share across workers.
    """

    cell_size: float
    origin: tuple[float, float]
    n_rows: int
    n_cols: int
    centers: np.ndarray
    cell_index: np.ndarray
    surf_top: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.centers.shape[0]

    @property
    def width(self) -> float:
        return self.n_cols * self.cell_size

    def ordering_hash(self) -> str:
        """SHA-256 of (cell size, ordered centers); guards feature order."""
        h = hashlib.sha256()
        h.update(np.float64(self.cell_size).tobytes())
        h.update(np.ascontiguousarray(self.centers).tobytes())
        return h.hexdigest()

    def staircase_top(self, x):
        """Soil-top elevation of the column containing ``x`` (staircase)."""
        x = np.asarray(x, dtype=np.float64)
        col = np.clip(
            np.floor((x - self.origin[0]) / self.cell_size).astype(np.int64),
            0,
            self.n_cols - 1,
        )
        out = self.surf_top[col]
        return out if out.ndim else float(out)


def build_grid(geometry: SlopeGeometry) -> CellGrid:
    """Discretise the soil body into active square cells.

    Rejects geometries whose extents are not whole multiples of the cell
    size. A cell is active when its center lies strictly below the
    surface polyline (centers exactly on the inclined face fall outside).
    """
    s = geometry.cell_size
    n_crest = _snap_cells(geometry.crest_extent, s, "crest extent")
    n_toe = _snap_cells(geometry.toe_extent, s, "toe extent")
    if geometry.slope_height > 0:
        _snap_cells(geometry.slope_height, s, "slope height")
    n_depth = _snap_cells(geometry.foundation_depth, s, "foundation depth")
    n_run = _snap_cells(geometry.slope_run, s, "slope run")
    n_cols = n_crest + n_run + n_toe
    n_rows = n_depth
    if n_cols == 0 or n_rows == 0:
        raise ValueError("geometry produces an empty grid")

    x0, y0 = geometry.origin
    xc = x0 + (np.arange(n_cols) + 0.5) * s
    yc = y0 + (np.arange(n_rows) + 0.5) * s
    surf = geometry.surface_elevation(xc)
    active = yc[:, None] < surf[None, :] - GEOM_EPS  # (row, col), row 0 at base

    cell_index = np.full((n_rows, n_cols), -1, dtype=np.int32)
    centers = []
    k = 0
    for r in range(n_rows - 1, -1, -1):  # top row first
        for c in range(n_cols):
            if active[r, c]:
                cell_index[r, c] = k
                centers.append((xc[c], yc[r]))
                k += 1
    if k == 0:
        raise ValueError("geometry produces no active cells")

    top_rows = np.where(active.any(axis=0), active.shape[0] - 1 - active[::-1].argmax(axis=0), -1)
    surf_top = y0 + (top_rows + 1) * s

    centers_arr = np.asarray(centers, dtype=np.float64)
    for arr in (centers_arr, cell_index, surf_top):
        arr.setflags(write=False)
    return CellGrid(
        cell_size=s,
        origin=geometry.origin,
        n_rows=n_rows,
        n_cols=n_cols,
        centers=centers_arr,
        cell_index=cell_index,
        surf_top=surf_top,
    )


@lru_cache(maxsize=32)
def default_grid(geometry: SlopeGeometry) -> CellGrid:
    """Memoised grid for repeated stability calls on one geometry."""
    return build_grid(geometry)
