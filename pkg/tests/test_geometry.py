"""Grid builder: active-cell counts, ordering, staircase surface."""

import numpy as np
import pytest

from oracles import polygon_contains, slope_outline
from slopemc import SlopeGeometry, build_grid


class TestSlopeGeometry:
    def test_defaults_valid(self):
        g = SlopeGeometry()
        assert g.slope_run == pytest.approx(5.0)
        assert g.width == pytest.approx(27.5)
        assert g.crest_level == 10.0
        assert g.toe_level == 5.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"slope_angle": 0.0},
            {"slope_angle": 95.0},
            {"foundation_depth": 4.0},  # below slope height
            {"unit_weight": -1.0},
            {"cell_size": 0.0},
            {"crest_extent": -2.0},
        ],
    )
    def test_invalid_geometry_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SlopeGeometry(**kwargs)

    def test_surface_polyline(self):
        g = SlopeGeometry()
        assert g.surface_elevation(3.0) == 10.0
        assert g.surface_elevation(12.5) == pytest.approx(7.5)
        assert g.surface_elevation(20.0) == 5.0

    def test_dict_roundtrip(self):
        g = SlopeGeometry(crest_extent=8.0, origin=(1.0, 2.0))
        assert SlopeGeometry.from_dict(g.to_dict()) == g


class TestBuildGrid:
    def test_rectangular_body_four_cells(self):
        g = SlopeGeometry(
            slope_height=0.0,
            foundation_depth=1.0,
            crest_extent=1.0,
            toe_extent=0.0,
            cell_size=0.5,
        )
        grid = build_grid(g)
        assert grid.n_cells == 4

    def test_default_cell_count_near_800(self, grid):
        assert abs(grid.n_cells - 800) <= 80  # within 10%

    def test_count_matches_point_in_polygon(self, geometry, grid):
        poly = slope_outline(geometry)
        s = geometry.cell_size
        count = 0
        for r in range(grid.n_rows):
            for c in range(grid.n_cols):
                x = (c + 0.5) * s
                y = (r + 0.5) * s
                if polygon_contains(poly, x, y):
                    count += 1
        assert count == grid.n_cells

    def test_ordering_row_major_top_down(self, grid):
        ys = grid.centers[:, 1]
        xs = grid.centers[:, 0]
        # y never increases along the order; x increases within a row
        assert np.all(np.diff(ys) <= 0)
        same_row = np.diff(ys) == 0
        assert np.all(np.diff(xs)[same_row] > 0)

    def test_cell_index_consistent_with_centers(self, grid):
        s = grid.cell_size
        for i in (0, 100, grid.n_cells - 1):
            x, y = grid.centers[i]
            col = int((x - grid.origin[0]) // s)
            row = int((y - grid.origin[1]) // s)
            assert grid.cell_index[row, col] == i

    def test_centers_distinct(self, grid):
        seen = {tuple(c) for c in grid.centers}
        assert len(seen) == grid.n_cells

    def test_non_divisible_extent_rejected(self):
        with pytest.raises(ValueError, match="whole number"):
            build_grid(SlopeGeometry(crest_extent=10.3))

    def test_staircase_top_monotone_non_increasing(self, grid):
        assert np.all(np.diff(grid.surf_top) <= 0)

    def test_ordering_hash_stable_and_sensitive(self, geometry, grid):
        again = build_grid(geometry)
        assert again.ordering_hash() == grid.ordering_hash()
        other = build_grid(SlopeGeometry(toe_extent=13.0))
        assert other.ordering_hash() != grid.ordering_hash()

    def test_origin_shift_shifts_centers(self, geometry, grid):
        shifted = build_grid(SlopeGeometry(origin=(2.0, 1.5)))
        assert np.allclose(shifted.centers - np.array([2.0, 1.5]), grid.centers)
