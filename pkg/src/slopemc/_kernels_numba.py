"""Numba-jitted circle-equilibrium kernels (fast backend).

Mirrors ``_kernels_numpy`` exactly: same scan resolution, bisection
refinement, segment caps and sentinel conventions. Kernels release the
GIL so sample-level threading scales.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

SCAN_FRAC = 0.25
SEG_FRAC = 0.5
BISECT_ITERS = 52

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _inside(x, xc, yc, r, surf_top, s, x0, n_cols):
    dx = x - xc
    t = r * r - dx * dx
    if t < 0.0:
        return False
    col = int(math.floor((x - x0) / s))
    if col < 0 or col >= n_cols:
        return False
    return (yc - math.sqrt(t)) < surf_top[col]


@njit(**_JIT)
def _bisect_crossing(x_out, x_in, xc, yc, r, surf_top, s, x0, n_cols):
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (x_out + x_in)
        if _inside(mid, xc, yc, r, surf_top, s, x0, n_cols):
            x_in = mid
        else:
            x_out = mid
    return x_in


@njit(**_JIT)
def fos_one(xc, yc, r, cu, cell_index, surf_top, s, x0, y0, gamma):
    n_rows, n_cols = cell_index.shape
    width = n_cols * s
    if r <= 0.0 or yc - r < y0 - 1e-9:
        return np.nan
    x_lo = xc - r
    if x_lo < x0:
        x_lo = x0
    x_hi = xc + r
    if x_hi > x0 + width:
        x_hi = x0 + width
    if x_hi <= x_lo:
        return np.nan

    step = SCAN_FRAC * s
    n = int(math.ceil((x_hi - x_lo) / step))
    if n < 2:
        n = 2
    runs = 0
    first = -1
    last = -1
    prev = False
    for i in range(n + 1):
        x = x_lo + (x_hi - x_lo) * i / n
        ins = _inside(x, xc, yc, r, surf_top, s, x0, n_cols)
        if ins:
            if not prev:
                runs += 1
                if runs == 1:
                    first = i
            last = i
        prev = ins
    if runs != 1:
        return np.nan
    if first == 0 or last == n:
        return np.nan

    xa = x_lo + (x_hi - x_lo) * (first - 1) / n
    xb = x_lo + (x_hi - x_lo) * first / n
    x_in = _bisect_crossing(xa, xb, xc, yc, r, surf_top, s, x0, n_cols)
    xa = x_lo + (x_hi - x_lo) * (last + 1) / n
    xb = x_lo + (x_hi - x_lo) * last / n
    x_out = _bisect_crossing(xa, xb, xc, yc, r, surf_top, s, x0, n_cols)

    span = x_out - x_in
    n_col = int(math.ceil(span / (SEG_FRAC * s)))
    if n_col < 1:
        n_col = 1
    dxc = span / n_col
    drive = 0.0
    for j in range(n_col):
        x = x_in + (j + 0.5) * dxc
        t = r * r - (x - xc) * (x - xc)
        if t < 0.0:
            t = 0.0
        y_arc = yc - math.sqrt(t)
        col = int(math.floor((x - x0) / s))
        if col < 0:
            col = 0
        elif col >= n_cols:
            col = n_cols - 1
        # Crest-side (uphill) lever arm is positive: surface descends
        # with x, so columns at x < xc drive the rotation.
        h = surf_top[col] - y_arc
        if h > 0.0:
            drive += gamma * h * dxc * (xc - x)

    v = (x_in - xc) / r
    if v < -1.0:
        v = -1.0
    elif v > 1.0:
        v = 1.0
    phi_in = math.asin(v)
    v = (x_out - xc) / r
    if v < -1.0:
        v = -1.0
    elif v > 1.0:
        v = 1.0
    phi_out = math.asin(v)
    m = int(math.ceil(r * (phi_out - phi_in) / (SEG_FRAC * s)))
    if m < 1:
        m = 1
    dphi = (phi_out - phi_in) / m
    arc_sum = 0.0
    for k in range(m):
        phi = phi_in + (k + 0.5) * dphi
        x = xc + r * math.sin(phi)
        y = yc - r * math.cos(phi)
        col = int(math.floor((x - x0) / s))
        row = int(math.floor((y - y0) / s))
        if col < 0 or col >= n_cols or row < 0 or row >= n_rows:
            continue
        if y >= surf_top[col]:
            continue
        idx = cell_index[row, col]
        if idx >= 0:
            arc_sum += cu[idx]
    arc_sum *= r * dphi
    if arc_sum <= 0.0:
        return np.nan
    if drive <= 0.0:
        return np.inf
    return (r * arc_sum) / drive


@njit(**_JIT)
def fos_batch(xcs, ycs, rs, cu, cell_index, surf_top, s, x0, y0, gamma):
    out = np.empty(len(xcs))
    for i in range(len(xcs)):
        out[i] = fos_one(
            xcs[i], ycs[i], rs[i], cu, cell_index, surf_top, s, x0, y0, gamma
        )
    return out


@njit(**_JIT)
def sweep_min(xcs, ycs, rs, cu, cell_index, surf_top, s, x0, y0, gamma, early_exit):
    best = np.inf
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
