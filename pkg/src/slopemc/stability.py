"""Deterministic slope stability via circular-arc limit equilibrium.

Undrained (phi = 0) moment equilibrium about a trial circle center:

    FOS = R * sum(c_u * ds) / sum(W_j * x_j)

with the resisting strength integrated along the arc inside the soil
body and the driving weight integrated over soil columns above the arc
(signed lever arm, so columns uphill of the center stabilise). Failure
is FOS < 1 for the minimum over a circle grid plus one local refinement
pass; a tie at exactly 1.0 counts as stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import accel
from .geometry import CellGrid, SlopeGeometry, default_grid
from .randfield import FieldRealization

_K = accel.kernels()


class SearchSpaceError(ValueError):
    """Raised when no feasible or valid circle exists for a search."""


class InvalidCircleError(ValueError):
    """Raised when a single requested circle violates its invariants."""


@dataclass(frozen=True)
class TrialCircle:
    """Trial slip circle: center (x, y) and radius, meters."""

    x: float
    y: float
    radius: float


@dataclass(frozen=True)
class StabilityResult:
    status: str  # "failed" | "stable"
    fos_min: float | None = None
    critical_circle: TrialCircle | None = None
    evaluations: int = 0

    @property
    def failed(self) -> bool:
        return self.status == "failed"


@dataclass(frozen=True)
class SearchSpec:
    """Coarse circle-grid bounds; spacing halves in the refinement pass.

    Circles are enumerated center-x ascending, then center-y, then
    radius; radii run from ``r_min`` up to the largest base-respecting
    value (center height above the rigid base). That frozen order also
    fixes the early-exit scan sequence of classification.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    xy_step: float
    r_min: float
    r_step: float

    def __post_init__(self):
        if self.xy_step <= 0 or self.r_step <= 0:
            raise ValueError("search steps must be positive")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError("search bounds are inverted")
        if self.r_min <= 0:
            raise ValueError("r_min must be positive")

    @classmethod
    def default(cls, geometry: SlopeGeometry) -> "SearchSpec":
        """Center grid covering toe, face and deep base-tangent circles.

        x spans the slope face widened by one slope height each side,
        y spans crest level to 1.5 H above it, all at cell_size spacing.
        """
        x0, _ = geometry.origin
        h = geometry.slope_height if geometry.slope_height > 0 else geometry.foundation_depth
        face0 = x0 + geometry.crest_extent
        face1 = face0 + geometry.slope_run
        return cls(
            x_min=face0 - h,
            x_max=face1 + h,
            y_min=geometry.crest_level,
            y_max=geometry.crest_level + 1.5 * h,
            xy_step=geometry.cell_size,
            r_min=max(0.5 * h, geometry.cell_size),
            r_step=geometry.cell_size,
        )

    def circle_arrays(self, base_level: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Feasibility-filtered coarse grid as (xc, yc, r) arrays."""
        xs = _steps(self.x_min, self.x_max, self.xy_step)
        ys = _steps(self.y_min, self.y_max, self.xy_step)
        xcs, ycs, rs = [], [], []
        for x in xs:
            for y in ys:
                r_max = y - base_level  # tangent to the rigid base allowed
                r = self.r_min
                while r <= r_max + 1e-9:
                    xcs.append(x)
                    ycs.append(y)
                    rs.append(min(r, r_max))
                    r += self.r_step
        return (
            np.asarray(xcs, dtype=np.float64),
            np.asarray(ycs, dtype=np.float64),
            np.asarray(rs, dtype=np.float64),
        )


def _steps(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def _refinement_arrays(
    incumbent: TrialCircle, spec: SearchSpec, base_level: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Halved-spacing neighborhood around the incumbent minimum.

    Candidates stay inside the coarse search bounds, so the refined set
    is a subset of any uniformly denser grid over the same spec.
    """
    dxy = spec.xy_step
    dr = spec.r_step
    offsets_xy = (-dxy, -0.5 * dxy, 0.0, 0.5 * dxy, dxy)
    offsets_r = (-dr, -0.5 * dr, 0.0, 0.5 * dr, dr)
    xcs, ycs, rs = [], [], []
    for ox in offsets_xy:
        for oy in offsets_xy:
            for orr in offsets_r:
                if ox == 0.0 and oy == 0.0 and orr == 0.0:
                    continue
                x = incumbent.x + ox
                y = incumbent.y + oy
                r = incumbent.radius + orr
                if not (spec.x_min - 1e-9 <= x <= spec.x_max + 1e-9):
                    continue
                if not (spec.y_min - 1e-9 <= y <= spec.y_max + 1e-9):
                    continue
                if r < spec.r_min - 1e-9:
                    continue
                r_max = y - base_level
                if r > r_max + 1e-9:
                    continue
                xcs.append(x)
                ycs.append(y)
                rs.append(min(r, r_max))
    return (
        np.asarray(xcs, dtype=np.float64),
        np.asarray(ycs, dtype=np.float64),
        np.asarray(rs, dtype=np.float64),
    )


def _field_values(field) -> np.ndarray:
    if isinstance(field, FieldRealization):
        return field.values
    return np.ascontiguousarray(field, dtype=np.float64)


def _kernel_args(grid: CellGrid, geometry: SlopeGeometry):
    return (
        grid.cell_index,
        grid.surf_top,
        grid.cell_size,
        grid.origin[0],
        grid.origin[1],
        geometry.unit_weight,
    )


def circle_fos(
    field,
    circle: TrialCircle,
    geometry: SlopeGeometry,
    grid: CellGrid | None = None,
) -> float:
    """Factor of safety of a single trial circle.

    Returns +inf when the circle has no destabilising mass (non-critical).
    Raises InvalidCircleError when the circle does not cut the ground
    surface in exactly two points or penetrates the rigid base.
    """
    grid = grid or default_grid(geometry)
    cu = _field_values(field)
    if len(cu) != grid.n_cells:
        raise ValueError("field length does not match grid cell count")
    f = _K.fos_one(
        circle.x, circle.y, circle.radius, cu, *_kernel_args(grid, geometry)
    )
    if math.isnan(f):
        raise InvalidCircleError(
            f"circle {circle} does not form a valid slip surface"
        )
    return float(f)


def _searched_min(cu, geometry, grid, spec, early_exit):
    """Coarse sweep plus one refinement pass; shared by both entry points.

    Returns (fos, circle, evaluations). With ``early_exit`` > 0 the scan
    stops at the first FOS below the threshold; the returned fos is then
    simply the best seen so far (< threshold).
    """
    args = _kernel_args(grid, geometry)
    base = geometry.base_level
    xcs, ycs, rs = spec.circle_arrays(base)
    if len(xcs) == 0:
        raise SearchSpaceError("search space is empty after feasibility filtering")
    f0, i0, n0 = _K.sweep_min(xcs, ycs, rs, cu, *args, early_exit)
    if i0 < 0:
        raise SearchSpaceError("no candidate circle forms a valid slip surface")
    best = TrialCircle(float(xcs[i0]), float(ycs[i0]), float(rs[i0]))
    if early_exit > 0.0 and f0 < early_exit:
        return float(f0), best, int(n0)

    rx, ry, rr = _refinement_arrays(best, spec, base)
    f1, i1, n1 = _K.sweep_min(rx, ry, rr, cu, *args, early_exit)
    evals = int(n0 + n1)
    if i1 >= 0 and f1 < f0:
        return float(f1), TrialCircle(float(rx[i1]), float(ry[i1]), float(rr[i1])), evals
    return float(f0), best, evals


def min_fos(
    field,
    geometry: SlopeGeometry,
    search: SearchSpec | None = None,
    grid: CellGrid | None = None,
) -> StabilityResult:
    """Minimum factor of safety over the search grid with refinement."""
    grid = grid or default_grid(geometry)
    spec = search or SearchSpec.default(geometry)
    cu = _field_values(field)
    fos, circle, evals = _searched_min(cu, geometry, grid, spec, early_exit=0.0)
    status = "failed" if fos < 1.0 else "stable"
    return StabilityResult(
        status=status, fos_min=fos, critical_circle=circle, evaluations=evals
    )


def classify_stability(
    field,
    geometry: SlopeGeometry,
    search: SearchSpec | None = None,
    grid: CellGrid | None = None,
) -> StabilityResult:
    """Binary failed/stable label with early exit, no FOS reported.

    Scans the same circle set as ``min_fos`` in the same frozen order and
    stops at the first FOS < 1, so the label always equals
    ``min_fos(...).fos_min < 1`` for the same search specification.
    """
    grid = grid or default_grid(geometry)
    spec = search or SearchSpec.default(geometry)
    cu = _field_values(field)
    fos, circle, evals = _searched_min(cu, geometry, grid, spec, early_exit=1.0)
    status = "failed" if fos < 1.0 else "stable"
    return StabilityResult(status=status, fos_min=None, critical_circle=None, evaluations=evals)
