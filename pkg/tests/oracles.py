"""Independent reference implementations used only by the tests.

Everything here recomputes results through a different route than the
package (fine quadrature, exhaustive enumeration, finite differences)
so the tests never compare an implementation against itself.
"""

from __future__ import annotations

import math

import numpy as np


def polygon_contains(poly: list[tuple[float, float]], x: float, y: float) -> bool:
    """Even-odd ray casting, strict interior."""
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside


def slope_outline(geometry) -> list[tuple[float, float]]:
    """Closed polygon of the soil body (counter-clockwise)."""
    x0, y0 = geometry.origin
    run = geometry.slope_run
    w = geometry.width
    return [
        (x0, y0),
        (x0 + w, y0),
        (x0 + w, geometry.toe_level),
        (x0 + geometry.crest_extent + run, geometry.toe_level),
        (x0 + geometry.crest_extent, geometry.crest_level),
        (x0, geometry.crest_level),
    ]


def fos_homogeneous_quadrature(
    geometry, grid, cu: float, xc: float, yc: float, r: float, n_steps: int = 200_000
) -> float:
    """High-resolution moment-equilibrium FOS for a homogeneous field.

    Same geometric definitions as the package kernels (staircase soil
    top, crest-side positive lever arm) evaluated by brute-force Riemann
    sums at ~1000x finer resolution, with the slip interval located by
    dense scanning instead of bisection refinement.
    """
    x_lo = max(xc - r, grid.origin[0])
    x_hi = min(xc + r, grid.origin[0] + grid.n_cols * grid.cell_size)
    xs = np.linspace(x_lo, x_hi, n_steps)
    t = r * r - (xs - xc) ** 2
    y_arc = yc - np.sqrt(np.maximum(t, 0.0))
    surf = grid.staircase_top(xs)
    inside = (t >= 0) & (y_arc < surf)
    hit = np.flatnonzero(inside)
    assert hit.size > 0 and hit[0] > 0 and hit[-1] < n_steps - 1, "invalid circle"
    assert not np.any(np.diff(hit) > 1), "multiple slip intervals"
    x_in, x_out = xs[hit[0]], xs[hit[-1]]

    # driving: integrate gamma * h(x) * (xc - x) dx by midpoint rule
    xm = np.linspace(x_in, x_out, n_steps)
    dx = (x_out - x_in) / (n_steps - 1)
    xm = 0.5 * (xm[1:] + xm[:-1])
    h = grid.staircase_top(xm) - (yc - np.sqrt(np.maximum(r * r - (xm - xc) ** 2, 0.0)))
    h = np.maximum(h, 0.0)
    drive = float(np.sum(geometry.unit_weight * h * dx * (xc - xm)))

    # resisting: homogeneous strength, so R * cu * (arc length inside soil)
    phi_in = math.asin(max(min((x_in - xc) / r, 1.0), -1.0))
    phi_out = math.asin(max(min((x_out - xc) / r, 1.0), -1.0))
    phi = np.linspace(phi_in, phi_out, n_steps)
    phi = 0.5 * (phi[1:] + phi[:-1])
    dphi = (phi_out - phi_in) / (n_steps - 1)
    xa = xc + r * np.sin(phi)
    ya = yc - r * np.cos(phi)
    in_soil = ya < grid.staircase_top(xa)
    arc_len = float(np.sum(in_soil) * r * dphi)
    return (r * cu * arc_len) / drive


def auc_pair_counting(scores, labels) -> float:
    """Brute force over all (positive, negative) pairs; ties count half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    pos = s[y == 1]
    neg = s[y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def best_stump(x: np.ndarray, y: np.ndarray):
    """Exhaustive best depth-1 threshold rule on a single feature.

    Returns (threshold, left_class, right_class, accuracy); thresholds
    are midpoints between consecutive distinct values.
    """
    xs = np.sort(np.unique(x))
    candidates = 0.5 * (xs[1:] + xs[:-1])
    best = (None, 0, 0, -1.0)
    for thr in candidates:
        left = y[x <= thr]
        right = y[x > thr]
        for lc in (0, 1):
            for rc in (0, 1):
                acc = (np.sum(left == lc) + np.sum(right == rc)) / len(y)
                if acc > best[3]:
                    best = (thr, lc, rc, acc)
    return best


def best_linear_accuracy(x: np.ndarray, y: np.ndarray, n_angles: int = 360) -> float:
    """Best accuracy of any linear rule sign(w.x - b) by dense enumeration."""
    best = 0.0
    for k in range(n_angles):
        theta = math.pi * k / n_angles
        w = np.array([math.cos(theta), math.sin(theta)])
        proj = x @ w
        order = np.sort(np.unique(proj))
        thresholds = np.concatenate(
            [[order[0] - 1.0], 0.5 * (order[1:] + order[:-1]), [order[-1] + 1.0]]
        )
        for b in thresholds:
            pred = (proj > b).astype(int)
            acc = max(np.mean(pred == y), np.mean((1 - pred) == y))
            best = max(best, float(acc))
    return best


def numeric_gradient(loss_fn, weights: dict, h: float = 1e-6) -> dict:
    """Central finite differences of a scalar loss over a weight dict."""
    grads = {}
    for key, w in weights.items():
        g = np.zeros_like(w)
        it = np.nditer(w, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = w[ix]
            w[ix] = orig + h
            lp = loss_fn()
            w[ix] = orig - h
            lm = loss_fn()
            w[ix] = orig
            g[ix] = (lp - lm) / (2.0 * h)
        grads[key] = g
    return grads
