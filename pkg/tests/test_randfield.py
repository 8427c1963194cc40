"""Random-field generation: log-normal parameters, covariance, Cholesky,
realizations and empirical validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopemc import (
    FactorizationError,
    FieldStatistics,
    SlopeGeometry,
    build_covariance,
    build_grid,
    cholesky_factor,
    derive_lognormal,
    empirical_stats,
    field_factor,
    realize_field,
)
from slopemc.geometry import CellGrid


def make_square_grid(n_side: int, cell: float = 0.5) -> CellGrid:
    """Free-standing rectangular grid for covariance unit tests."""
    geom = SlopeGeometry(
        slope_height=0.0,
        foundation_depth=n_side * cell,
        crest_extent=n_side * cell,
        toe_extent=0.0,
        cell_size=cell,
    )
    return build_grid(geom)


class TestDeriveLognormal:
    def test_reference_values(self):
        mu_ln, sigma_ln = derive_lognormal(18.6, 0.5)
        assert sigma_ln == pytest.approx(0.472381, abs=1e-6)
        assert mu_ln == pytest.approx(2.811580, abs=1e-6)

        mu_ln, sigma_ln = derive_lognormal(26.0, 0.0)
        assert sigma_ln == 0.0
        assert mu_ln == pytest.approx(math.log(26.0), abs=1e-12)

        mu_ln, sigma_ln = derive_lognormal(26.0, 0.3)
        assert sigma_ln == pytest.approx(0.293560, abs=1e-6)
        assert mu_ln == pytest.approx(3.214813, abs=1e-6)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            derive_lognormal(0.0, 0.3)
        with pytest.raises(ValueError):
            derive_lognormal(-5.0, 0.3)
        with pytest.raises(ValueError):
            derive_lognormal(20.0, -0.1)

    @given(
        mu=st.floats(min_value=1.0, max_value=100.0),
        cov=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_identities_machine_precision(self, mu, cov):
        mu_ln, sigma_ln = derive_lognormal(mu, cov)
        assert sigma_ln * sigma_ln == pytest.approx(math.log1p(cov * cov), rel=1e-14)
        assert mu_ln == pytest.approx(math.log(mu) - 0.5 * sigma_ln**2, rel=1e-14)
        # the pair reproduces the target moments of the log-normal
        mean = math.exp(mu_ln + 0.5 * sigma_ln**2)
        var = (math.exp(sigma_ln**2) - 1.0) * mean**2
        assert mean == pytest.approx(mu, rel=1e-12)
        assert math.sqrt(var) == pytest.approx(cov * mu, rel=1e-9, abs=1e-12)


class TestFieldStatistics:
    def test_derived_fields(self):
        s = FieldStatistics(mu_cu=18.6, cov=0.5, delta_h=12.0, delta_v=1.0)
        assert s.xi == 12.0
        assert s.sigma_ln == pytest.approx(0.472381, abs=1e-6)

    def test_rejects_bad_deltas(self):
        with pytest.raises(ValueError):
            FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=0.0, delta_v=1.0)


class TestCovariance:
    def test_lag_values(self):
        grid = make_square_grid(4)
        stats = FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=1.0, delta_v=0.5)
        a = build_covariance(grid, stats)
        var = stats.sigma_ln**2
        assert np.allclose(np.diag(a), var)

        # pair at horizontal lag exactly delta_h (2 cells of 0.5 m)
        x, y = grid.centers[:, 0], grid.centers[:, 1]
        i = 0
        j = np.flatnonzero((x == x[i] + 1.0) & (y == y[i]))[0]
        assert a[i, j] == pytest.approx(var * math.exp(-1.0), rel=1e-12)
        # pair at lag (delta_h, delta_v)
        k = np.flatnonzero((x == x[i] + 1.0) & (y == y[i] - 0.5))[0]
        assert a[i, k] == pytest.approx(var * math.exp(-2.0), rel=1e-12)

    def test_symmetry_and_range(self):
        grid = make_square_grid(5)
        stats = FieldStatistics(mu_cu=25.0, cov=0.4, delta_h=3.0, delta_v=1.0)
        a = build_covariance(grid, stats)
        assert np.array_equal(a, a.T)
        assert np.all(a > 0.0)
        assert np.all(a <= stats.sigma_ln**2 + 1e-15)

    def test_separability(self):
        """Full covariance = elementwise product of per-axis factors / var."""
        grid = make_square_grid(3)
        stats = FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=2.0, delta_v=0.5)
        var = stats.sigma_ln**2
        x, y = grid.centers[:, 0], grid.centers[:, 1]
        ah = var * np.exp(-np.abs(x[:, None] - x[None, :]) / stats.delta_h)
        av = var * np.exp(-np.abs(y[:, None] - y[None, :]) / stats.delta_v)
        a = build_covariance(grid, stats)
        assert np.allclose(a, ah * av / var, rtol=1e-14)

    def test_isotropy_axis_swap(self):
        """With equal correlation distances, swapping x and y leaves A as-is."""
        grid = make_square_grid(4)
        stats = FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=2.0, delta_v=2.0)
        a = build_covariance(grid, stats)
        swapped = CellGrid(
            cell_size=grid.cell_size,
            origin=grid.origin,
            n_rows=grid.n_cols,
            n_cols=grid.n_rows,
            centers=grid.centers[:, ::-1].copy(),
            cell_index=grid.cell_index.T.copy(),
            surf_top=grid.surf_top,
        )
        a2 = build_covariance(swapped, stats)
        assert np.allclose(a, a2, rtol=1e-14)


class TestCholesky:
    def test_identity(self):
        eye = np.eye(6)
        assert np.array_equal(cholesky_factor(eye), eye)

    def test_known_2x2(self):
        a = np.array([[4.0, 2.0], [2.0, 3.0]])
        l = cholesky_factor(a)
        assert np.allclose(l, [[2.0, 0.0], [1.0, math.sqrt(2.0)]])
        assert np.allclose(l @ l.T, a)

    def test_strict_upper_zero_and_reconstruction(self, grid):
        stats = FieldStatistics(mu_cu=18.6, cov=0.3, delta_h=6.0, delta_v=1.0)
        a = build_covariance(grid, stats)
        l = cholesky_factor(a)
        assert np.all(np.triu(l, k=1) == 0.0)
        err = np.max(np.abs(l @ l.T - a))
        assert err <= 1e-8 * stats.sigma_ln**2

    def test_marginal_variance_preserved(self, grid):
        stats = FieldStatistics(mu_cu=26.0, cov=0.5, delta_h=12.0, delta_v=1.0)
        a = build_covariance(grid, stats)
        l = cholesky_factor(a)
        row_norms = np.sum(l * l, axis=1)
        assert np.max(np.abs(row_norms - stats.sigma_ln**2)) <= 1e-8 * stats.sigma_ln**2

    def test_failure_reports_pivot(self):
        a = np.eye(4)
        a[2, 2] = -1.0  # indefinite, jitter cannot rescue at this scale
        with pytest.raises(FactorizationError) as ei:
            cholesky_factor(a)
        assert ei.value.pivot_index == 2


class TestRealizeField:
    def test_deterministic_bit_identical(self, grid):
        stats = FieldStatistics(mu_cu=22.3, cov=0.3, delta_h=6.0, delta_v=1.0)
        L = field_factor(grid, stats)
        f1 = realize_field(L, stats, 12345)
        f2 = realize_field(L, stats, 12345)
        assert np.array_equal(f1.values, f2.values)
        f3 = realize_field(L, stats, 12346)
        assert not np.array_equal(f1.values, f3.values)

    def test_zero_cov_gives_constant_field(self, grid):
        stats = FieldStatistics(mu_cu=26.0, cov=0.0, delta_h=6.0, delta_v=1.0)
        L = field_factor(grid, stats)
        f = realize_field(L, stats, 7)
        assert np.all(f.values == 26.0)

    def test_values_positive(self, grid):
        stats = FieldStatistics(mu_cu=18.6, cov=0.5, delta_h=25.0, delta_v=1.0)
        L = field_factor(grid, stats)
        f = realize_field(L, stats, 99)
        assert np.all(f.values > 0.0)
        assert len(f.values) == grid.n_cells

    def test_ensemble_moments(self):
        """Monte Carlo moment check on a small grid (10k realizations)."""
        small = make_square_grid(6)
        stats = FieldStatistics(mu_cu=22.3, cov=0.4, delta_h=2.0, delta_v=1.0)
        L = field_factor(small, stats)
        rng_seeds = range(10_000)
        mat = np.stack([realize_field(L, stats, s).values for s in rng_seeds])
        cell = 11
        mean = mat[:, cell].mean()
        se = mat[:, cell].std(ddof=1) / math.sqrt(len(mat))
        assert abs(mean - stats.mu_cu) <= 3.0 * se
        cov_emp = mat[:, cell].std(ddof=1) / mean
        assert cov_emp == pytest.approx(stats.cov, rel=0.05)


class TestEmpiricalStats:
    def test_homogeneous_ensemble(self, grid):
        stats = FieldStatistics(mu_cu=26.0, cov=0.0, delta_h=6.0, delta_v=1.0)
        L = field_factor(grid, stats)
        fields = [realize_field(L, stats, s) for s in range(3)]
        rep = empirical_stats(fields, grid, stats)
        assert rep.pooled_cov == 0.0
        assert rep.lag_corr_h is None  # undefined, reported as such
        assert rep.lag_corr_v is None

    def test_lag_correlation_matches_target(self):
        small = make_square_grid(8)
        stats = FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=1.5, delta_v=1.0)
        L = field_factor(small, stats)
        mat = np.stack([realize_field(L, stats, s).values for s in range(4000)])
        rep = empirical_stats(mat, small, stats)
        assert rep.lag_corr_h == pytest.approx(math.exp(-1.0), abs=0.03)
        assert rep.lag_corr_v == pytest.approx(math.exp(-1.0), abs=0.03)
        assert abs(rep.ln_skewness) <= 0.1

    def test_grid_mismatch_rejected(self, grid):
        with pytest.raises(ValueError):
            empirical_stats(
                np.ones((5, grid.n_cells + 1)),
                grid,
                FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=6.0, delta_v=1.0),
            )

    def test_needs_two_realizations(self, grid):
        with pytest.raises(ValueError):
            empirical_stats(
                np.ones((1, grid.n_cells)),
                grid,
                FieldStatistics(mu_cu=20.0, cov=0.3, delta_h=6.0, delta_v=1.0),
            )
