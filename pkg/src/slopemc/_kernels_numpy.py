"""Pure-numpy circle-equilibrium kernels (fallback backend).

Semantics are shared with the numba backend and frozen:

* the arc/surface intersection interval is located by scanning x at
  cell_size/4 resolution and refining both crossings with 52 bisection
  steps against the staircase surface;
* a circle is valid only when the inside set is a single interval that
  does not touch the domain boundary or the arc endpoints;
* driving moment integrates soil columns of width <= cell_size/2 between
  the crossings; resisting moment integrates strength over arc segments
  of length <= cell_size/2, each segment taking the containing cell's
  strength;
* return value: NaN for an invalid circle, +inf when the driving moment
  is non-positive, otherwise resisting/driving moment ratio.
"""

from __future__ import annotations

import math

import numpy as np

SCAN_FRAC = 0.25  # scan step as a fraction of cell_size
SEG_FRAC = 0.5  # column width / arc segment cap as a fraction of cell_size
BISECT_ITERS = 52


def _inside_scalar(x, xc, yc, r, surf_top, s, x0, n_cols):
    dx = x - xc
    t = r * r - dx * dx
    if t < 0.0:
        return False
    col = int(math.floor((x - x0) / s))
    if col < 0 or col >= n_cols:
        return False
    return (yc - math.sqrt(t)) < surf_top[col]


def _bisect_crossing(x_out, x_in, xc, yc, r, surf_top, s, x0, n_cols):
    """Refine the surface crossing between an outside and an inside point."""
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (x_out + x_in)
        if _inside_scalar(mid, xc, yc, r, surf_top, s, x0, n_cols):
            x_in = mid
        else:
            x_out = mid
    return x_in


def fos_one(xc, yc, r, cu, cell_index, surf_top, s, x0, y0, gamma):
    n_rows, n_cols = cell_index.shape
    width = n_cols * s
    if r <= 0.0 or yc - r < y0 - 1e-9:
        return math.nan
    x_lo = max(xc - r, x0)
    x_hi = min(xc + r, x0 + width)
    if x_hi <= x_lo:
        return math.nan

    step = SCAN_FRAC * s
    n = max(int(math.ceil((x_hi - x_lo) / step)), 2)
    xs = x_lo + (x_hi - x_lo) * np.arange(n + 1) / n
    t = r * r - (xs - xc) ** 2
    ok = t >= 0.0
    y_arc = np.where(ok, yc - np.sqrt(np.where(ok, t, 0.0)), np.inf)
    col = np.floor((xs - x0) / s).astype(np.int64)
    in_dom = (col >= 0) & (col < n_cols)
    inside = ok & in_dom & (y_arc < surf_top[np.clip(col, 0, n_cols - 1)])

    hit = np.flatnonzero(inside)
    if hit.size == 0:
        return math.nan
    if np.any(np.diff(hit) > 1):  # more than one inside interval
        return math.nan
    first, last = int(hit[0]), int(hit[-1])
    if first == 0 or last == n:  # touches a wall or the arc endpoint
        return math.nan

    args = (xc, yc, r, surf_top, s, x0, n_cols)
    x_in = _bisect_crossing(xs[first - 1], xs[first], *args)
    x_out = _bisect_crossing(xs[last + 1], xs[last], *args)

    # Driving moment: soil columns above the arc, signed lever arm about
    # the center. The crest-side (uphill) mass drives the rotation out of
    # the slope, so the lever arm is positive toward the crest (x < xc
    # when the ground descends with x); toe-side columns stabilise.
    span = x_out - x_in
    n_col = max(int(math.ceil(span / (SEG_FRAC * s))), 1)
    dxc = span / n_col
    xm = x_in + (np.arange(n_col) + 0.5) * dxc
    y_arc_m = yc - np.sqrt(np.maximum(r * r - (xm - xc) ** 2, 0.0))
    cols = np.clip(np.floor((xm - x0) / s).astype(np.int64), 0, n_cols - 1)
    h = np.maximum(surf_top[cols] - y_arc_m, 0.0)
    drive = float(np.sum(gamma * h * dxc * (xc - xm)))

    # Resisting moment: R * sum(c_u * ds) over arc segments inside soil.
    phi_in = math.asin(min(max((x_in - xc) / r, -1.0), 1.0))
    phi_out = math.asin(min(max((x_out - xc) / r, -1.0), 1.0))
    m = max(int(math.ceil(r * (phi_out - phi_in) / (SEG_FRAC * s))), 1)
    dphi = (phi_out - phi_in) / m
    phi = phi_in + (np.arange(m) + 0.5) * dphi
    xa = xc + r * np.sin(phi)
    ya = yc - r * np.cos(phi)
    ca = np.floor((xa - x0) / s).astype(np.int64)
    ra = np.floor((ya - y0) / s).astype(np.int64)
    valid = (ca >= 0) & (ca < n_cols) & (ra >= 0) & (ra < n_rows)
    ca_c = np.clip(ca, 0, n_cols - 1)
    ra_c = np.clip(ra, 0, n_rows - 1)
    valid &= ya < surf_top[ca_c]
    idx = cell_index[ra_c, ca_c]
    valid &= idx >= 0
    arc_sum = float(np.sum(np.where(valid, cu[np.maximum(idx, 0)], 0.0)) * (r * dphi))
    if arc_sum <= 0.0:
        return math.nan
    if drive <= 0.0:
        return math.inf
    return (r * arc_sum) / drive


def fos_batch(xcs, ycs, rs, cu, cell_index, surf_top, s, x0, y0, gamma):
    out = np.empty(len(xcs))
    for i in range(len(xcs)):
        out[i] = fos_one(
            xcs[i], ycs[i], rs[i], cu, cell_index, surf_top, s, x0, y0, gamma
        )
    return out


def sweep_min(xcs, ycs, rs, cu, cell_index, surf_top, s, x0, y0, gamma, early_exit):
    """Scan circles in order; track the minimum valid FOS.

    ``early_exit > 0`` stops at the first FOS below the threshold.
    Returns (min_fos, argmin, evaluations); argmin = -1 when no circle
    was valid.
    """
    best = math.inf
    best_i = -1
    n = len(xcs)
    for i in range(n):
        f = fos_one(xcs[i], ycs[i], rs[i], cu, cell_index, surf_top, s, x0, y0, gamma)
        if math.isnan(f):
            continue
        if f < best:
            best = f
            best_i = i
        if early_exit > 0.0 and f < early_exit:
            return best, best_i, i + 1
    return best, best_i, n
