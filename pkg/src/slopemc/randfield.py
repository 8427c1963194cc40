"""Stationary anisotropic log-normal random fields of undrained shear strength.

A field is characterised by point statistics (mean and coefficient of
variation of C_u) and spatial statistics (horizontal and vertical
correlation distances). Realizations are drawn on a cell grid by
factorising the log-space covariance matrix once, L L^T = A, and mapping
independent standard normals through

    C_u = exp(L eps + mu_ln)

which reproduces the log-normal marginal and the exponential covariance
structure exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .geometry import CellGrid

# Diagonal jitter schedule for round-off-induced factorization failures:
# start at JITTER_REL * sigma_ln^2, escalate x10, at most 3 retries.
JITTER_REL = 1e-10
JITTER_RETRIES = 3


class FactorizationError(RuntimeError):
    """Covariance factorization failed after the jitter schedule.

    ``pivot_index`` is the 0-based index of the first non-positive pivot.
    """

    def __init__(self, pivot_index: int, attempts: int):
        self.pivot_index = pivot_index
        self.attempts = attempts
        super().__init__(
            f"Cholesky factorization failed at pivot {pivot_index} "
            f"after {attempts} jitter attempts"
        )


def derive_lognormal(mu_cu: float, cov: float) -> tuple[float, float]:
    """Log-space mean and standard deviation for a log-normal variable.

    sigma_ln = sqrt(ln(1 + cov^2)) and mu_ln = ln(mu_cu) - sigma_ln^2 / 2,
    so that exp of a N(mu_ln, sigma_ln^2) variate has mean ``mu_cu`` and
    coefficient of variation ``cov``.
    """
    if not mu_cu > 0:
        raise ValueError(f"mu_cu must be positive, got {mu_cu}")
    if cov < 0:
        raise ValueError(f"cov must be non-negative, got {cov}")
    sigma_ln = math.sqrt(math.log1p(cov * cov))
    mu_ln = math.log(mu_cu) - 0.5 * sigma_ln * sigma_ln
    return mu_ln, sigma_ln


@dataclass(frozen=True)
class FieldStatistics:
    """Point and spatial statistics of one random-field configuration.

    ``mu_ln`` and ``sigma_ln`` are derived from (mu_cu, cov) at
    construction; the anisotropy ratio is always the quotient
    delta_h / delta_v, never stored separately.
    """

    mu_cu: float
    cov: float
    delta_h: float
    delta_v: float
    mu_ln: float = 0.0
    sigma_ln: float = 0.0

    def __post_init__(self):
        if not self.delta_h > 0 or not self.delta_v > 0:
            raise ValueError("correlation distances must be positive")
        mu_ln, sigma_ln = derive_lognormal(self.mu_cu, self.cov)
        object.__setattr__(self, "mu_ln", mu_ln)
        object.__setattr__(self, "sigma_ln", sigma_ln)

    @property
    def xi(self) -> float:
        """Anisotropy ratio delta_h / delta_v."""
        return self.delta_h / self.delta_v

    @property
    def label(self) -> str:
        return (
            f"mu{self.mu_cu:g}_cov{self.cov:g}"
            f"_dh{self.delta_h:g}_dv{self.delta_v:g}"
        )


@dataclass(frozen=True)
class FieldRealization:
    """One sampled strength map: C_u per active cell, in grid order."""

    values: np.ndarray
    seed: int
    stats_ref: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ValueError("field values must be a 1-D vector")
        if not np.all(v > 0):
            raise ValueError("log-normal field values must be positive")


def build_covariance(grid: CellGrid, stats: FieldStatistics) -> np.ndarray:
    """Dense log-space covariance matrix for all active-cell center pairs.

    A[i, j] = sigma_ln^2 * exp(-|xi - xj| / delta_h - |yi - yj| / delta_v)
    """
    if grid.n_cells == 0:
        raise ValueError("grid has no active cells")
    x = grid.centers[:, 0]
    y = grid.centers[:, 1]
    lx = np.abs(x[:, None] - x[None, :])
    ly = np.abs(y[:, None] - y[None, :])
    var = stats.sigma_ln * stats.sigma_ln
    return var * np.exp(-lx / stats.delta_h - ly / stats.delta_v)


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T equal to ``cov``.

    Exponential covariances are positive definite in exact arithmetic;
    if round-off produces a non-positive pivot, a small diagonal jitter
    is added and escalated before failing loudly.
    """
    a = np.asarray(cov, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("covariance must be a square matrix")
    var = float(a[0, 0])
    jitter = JITTER_REL * var
    attempt = 0
    work = a
    while True:
        c, info = lapack.dpotrf(work, lower=1)
        if info == 0:
            return np.tril(c)
        if info < 0:
            raise RuntimeError(f"illegal value in dpotrf argument {-info}")
        attempt += 1
        if attempt > JITTER_RETRIES or jitter <= 0.0:
            raise FactorizationError(pivot_index=int(info) - 1, attempts=attempt)
        work = a + np.eye(a.shape[0]) * jitter
        jitter *= 10.0


def field_factor(grid: CellGrid, stats: FieldStatistics) -> np.ndarray:
    """Cholesky factor for a configuration; zero matrix when cov == 0.

    The homogeneous case has a singular (all-zero) covariance, for which
    the factor is the zero matrix: every realization then equals mu_cu in
    each cell.
    """
    if stats.sigma_ln == 0.0:
        return np.zeros((grid.n_cells, grid.n_cells))
    return cholesky_factor(build_covariance(grid, stats))


def realize_field(L: np.ndarray, stats: FieldStatistics, seed: int) -> FieldRealization:
    """Draw one field realization.

    The normal variates come from a Philox counter-based generator keyed
    by ``seed`` (numpy's ziggurat standard-normal transform); the same
    (L, stats, seed) triple therefore regenerates bit-identical values
    regardless of how many workers run concurrently.
    """
    n = L.shape[0]
    rng = np.random.Generator(np.random.Philox(key=seed))
    eps = rng.standard_normal(n)
    values = np.exp(L @ eps + stats.mu_ln)
    return FieldRealization(values=values, seed=seed, stats_ref=stats.label)


@dataclass(frozen=True)
class FieldEnsembleStats:
    """Empirical statistics over an ensemble of realizations.

    Correlations are Pearson coefficients of the log-field pooled over
    all exactly-matching cell pairs at the requested lag; they are None
    when undefined (zero variance or no matching pairs).
    """

    n_realizations: int
    per_cell_mean: np.ndarray
    per_cell_cov: np.ndarray
    pooled_mean: float
    pooled_cov: float
    ln_skewness: float
    lag_corr_h: float | None
    lag_corr_v: float | None
    n_pairs_h: int
    n_pairs_v: int


def _lag_pairs(grid: CellGrid, d_cols: int, d_rows: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs of active cells separated by an exact grid offset."""
    idx = grid.cell_index
    n_rows, n_cols = idx.shape
    if d_cols >= n_cols or d_rows >= n_rows:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    a_list = []
    b_list = []
    for r in range(n_rows):
        r2 = r + d_rows
        if r2 < 0 or r2 >= n_rows:
            continue
        a = idx[r, : n_cols - d_cols] if d_cols else idx[r, :]
        b = idx[r2, d_cols:] if d_cols else idx[r2, :]
        keep = (a >= 0) & (b >= 0)
        a_list.append(a[keep])
        b_list.append(b[keep])
    if not a_list:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(a_list), np.concatenate(b_list)


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(a @ a) * float(b @ b))
    if denom == 0.0:
        return None
    return float(a @ b) / denom


def empirical_stats(
    fields, grid: CellGrid, stats: FieldStatistics
) -> FieldEnsembleStats:
    """Validate an ensemble against its target statistics.

    ``fields`` is a sequence of FieldRealization (or a (n_real, n_cells)
    array). Reports per-cell mean/COV, pooled skewness of ln C_u, and the
    empirical log-field correlation at lags (delta_h, 0) and (0, delta_v).
    """
    if isinstance(fields, np.ndarray):
        mat = np.asarray(fields, dtype=np.float64)
    else:
        mat = np.stack([np.asarray(f.values, dtype=np.float64) for f in fields])
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise ValueError("need at least 2 realizations")
    if mat.shape[1] != grid.n_cells:
        raise ValueError(
            f"field length {mat.shape[1]} does not match grid cell count {grid.n_cells}"
        )

    per_cell_mean = mat.mean(axis=0)
    per_cell_std = mat.std(axis=0, ddof=1)
    per_cell_cov = per_cell_std / per_cell_mean

    ln = np.log(mat)
    ln_c = ln - ln.mean()
    m2 = float(np.mean(ln_c**2))
    m3 = float(np.mean(ln_c**3))
    ln_skewness = 0.0 if m2 == 0.0 else m3 / m2**1.5

    s = grid.cell_size
    dh_cols = int(round(stats.delta_h / s))
    dv_rows = int(round(stats.delta_v / s))
    ah, bh = _lag_pairs(grid, dh_cols, 0)
    av, bv = _lag_pairs(grid, 0, dv_rows)
    corr_h = _pearson(ln[:, ah].ravel(), ln[:, bh].ravel()) if len(ah) else None
    corr_v = _pearson(ln[:, av].ravel(), ln[:, bv].ravel()) if len(av) else None

    return FieldEnsembleStats(
        n_realizations=mat.shape[0],
        per_cell_mean=per_cell_mean,
        per_cell_cov=per_cell_cov,
        pooled_mean=float(per_cell_mean.mean()),
        pooled_cov=float(per_cell_cov.mean()),
        ln_skewness=ln_skewness,
        lag_corr_h=corr_h,
        lag_corr_v=corr_v,
        n_pairs_h=int(len(ah)),
        n_pairs_v=int(len(av)),
    )
