"""
Tests for Grid, ScalarField, VectorField and BoundaryAssignment entities.
"""

from itertools import product

import numpy as np
import pytest

from core.domain.entities.grid import BoundaryAssignment, Grid, ScalarField, VectorField
from core.domain.exceptions import InvalidParameterError, OutOfDomainError
from core.domain.value_objects.mask_kind import MaskKind

from .conftest import create_field, create_grid


class TestGridCreation:
    """Tests for Grid construction and validation."""

    def test_spacing_and_shape(self):
        """h = 2L/(res - 1) and one axis per dimension."""
        grid = create_grid(17)
        assert grid.h == 0.125
        assert grid.shape == (17, 17)
        assert grid.size == 289

    def test_half_width_scales_spacing(self):
        grid = create_grid(17, half_width=2.0)
        assert grid.h == 0.25
        assert grid.axis[0] == -2.0
        assert grid.axis[-1] == 2.0

    @pytest.mark.parametrize("resolution", [7, 16, 32])
    def test_rejects_small_or_even_resolution(self, resolution):
        with pytest.raises(InvalidParameterError):
            create_grid(resolution)

    def test_rejects_dimension_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            create_grid(dim=5)

    def test_rejects_non_positive_half_width(self):
        with pytest.raises(InvalidParameterError):
            create_grid(half_width=0.0)

    def test_invalid_parameter_error_is_value_error(self):
        """Callers catching ValueError still see bad parameters."""
        with pytest.raises(ValueError):
            create_grid(8)

    def test_grids_with_same_parameters_are_equal(self):
        assert create_grid() == create_grid()
        assert create_grid() != create_grid(mask_kind=MaskKind.SQUARE)

    def test_origin_is_a_node(self):
        grid = create_grid(33)
        assert grid.coordinates[16, 16].tolist() == [0.0, 0.0]


class TestGridMask:
    """Tests for interior/boundary classification."""

    def test_ball_interior_is_open_disk(self, ball_grid):
        assert np.all(ball_grid.radius[ball_grid.interior] < 1.0)

    def test_ball_boundary_ring_is_thin(self, ball_grid):
        """Every boundary node lies within 2h outside the sphere."""
        radius = ball_grid.radius[ball_grid.boundary]
        assert np.all(radius >= 1.0)
        assert np.all(radius <= 1.0 + 2.0 * ball_grid.h)

    def test_ball_interior_neighbours_are_active(self, ball_grid):
        """Every interior node has its full 3x3 neighbourhood active."""
        active = ball_grid.active
        for i, j in np.argwhere(ball_grid.interior):
            for di, dj in product((-1, 0, 1), repeat=2):
                assert active[i + di, j + dj]

    def test_square_boundary_is_rim(self, square_grid):
        assert np.count_nonzero(square_grid.boundary) == 4 * (square_grid.resolution - 1)
        assert np.count_nonzero(square_grid.interior) == (square_grid.resolution - 2) ** 2
        assert not np.any(square_grid.mask == 0)

    def test_ball_has_exterior_corners(self, ball_grid):
        assert not ball_grid.active[0, 0]

    def test_index_arrays_match_masks(self, ball_grid):
        assert len(ball_grid.boundary_indices) == np.count_nonzero(ball_grid.boundary)
        assert len(ball_grid.interior_indices) == np.count_nonzero(ball_grid.interior)


class TestGridLookups:
    """Tests for boundary points, node lookup and balls."""

    def test_ball_boundary_points_lie_on_sphere(self):
        grid = create_grid(33, half_width=2.0)
        norms = np.linalg.norm(grid.boundary_points(), axis=-1)
        assert norms == pytest.approx(np.full(len(norms), 2.0), abs=1e-12)

    def test_square_boundary_points_are_nodes(self, square_grid):
        points = square_grid.boundary_points()
        assert np.all(np.max(np.abs(points), axis=-1) == 1.0)

    def test_index_of_origin(self, ball_grid):
        assert ball_grid.index_of((0.0, 0.0)) == (8, 8)

    def test_index_of_rounds_to_nearest_node(self, ball_grid):
        assert ball_grid.index_of((0.26, -0.01)) == (10, 8)

    def test_index_of_outside_box_raises(self, ball_grid):
        with pytest.raises(OutOfDomainError):
            ball_grid.index_of((1.5, 0.0))

    def test_index_of_wrong_dimension_raises(self, ball_grid):
        with pytest.raises(InvalidParameterError):
            ball_grid.index_of((0.0, 0.0, 0.0))

    def test_ball_inside_domain_on_ball_grid(self, ball_grid):
        assert ball_grid.ball_inside_domain((0.5, 0.0), 0.5)
        assert not ball_grid.ball_inside_domain((0.5, 0.0), 0.6)

    def test_ball_inside_domain_on_square_grid(self, square_grid):
        """The square contains the corner-touching ball that the disk does not."""
        assert square_grid.ball_inside_domain((0.5, 0.5), 0.5)
        assert not square_grid.ball_inside_domain((0.6, 0.5), 0.5)

    def test_ball_nodes_closed_and_strict(self, ball_grid):
        h = ball_grid.h
        assert np.count_nonzero(ball_grid.ball_nodes((0.0, 0.0), h)) == 5
        assert np.count_nonzero(ball_grid.ball_nodes((0.0, 0.0), h, strict=True)) == 1

    def test_header(self):
        assert create_grid(17).header() == "# dim=2 res=17 mask=ball"
        assert create_grid(17, MaskKind.SQUARE, half_width=2.0).header() == "# dim=2 res=17 mask=square half_width=2.0"


class TestScalarField:
    """Tests for ScalarField invariants and arithmetic."""

    def test_exterior_nodes_are_nan(self, ball_grid):
        field = create_field(ball_grid)
        assert np.all(np.isnan(field.values[~ball_grid.active]))
        assert np.all(field.values[ball_grid.active] == 1.0)

    def test_non_finite_active_value_raises(self, ball_grid):
        values = np.ones(ball_grid.shape)
        values[8, 8] = np.inf
        with pytest.raises(InvalidParameterError):
            ScalarField(ball_grid, values)

    def test_shape_mismatch_raises(self, ball_grid):
        with pytest.raises(InvalidParameterError):
            ScalarField(ball_grid, np.ones((3, 3)))

    def test_values_are_read_only(self, ball_grid):
        field = create_field(ball_grid)
        with pytest.raises(ValueError):
            field.values[8, 8] = 2.0

    def test_source_array_is_copied(self, ball_grid):
        values = np.ones(ball_grid.shape)
        field = ScalarField(ball_grid, values)
        values[8, 8] = 5.0
        assert field.at((0.0, 0.0)) == 1.0

    def test_arithmetic(self, ball_grid):
        f = create_field(ball_grid, 2.0)
        g = create_field(ball_grid, 0.5)
        assert (f + g).at((0, 0)) == 2.5
        assert (f - g).at((0, 0)) == 1.5
        assert (3.0 * f).at((0, 0)) == 6.0
        assert (-f).at((0, 0)) == -2.0
        assert (f + 1.0).at((0, 0)) == 3.0

    def test_active_values(self, ball_grid):
        field = create_field(ball_grid)
        assert len(field.active_values()) == np.count_nonzero(ball_grid.active)

    def test_with_values_keeps_grid(self, ball_grid):
        field = create_field(ball_grid).with_values(np.zeros(ball_grid.shape))
        assert field.grid is ball_grid
        assert field.at((0.5, 0.0)) == 0.0


class TestVectorField:
    """Tests for VectorField helpers."""

    def test_norm_and_dot(self, square_grid):
        values = np.zeros((*square_grid.shape, 2))
        values[..., 0] = 3.0
        values[..., 1] = 4.0
        field = VectorField(square_grid, values)
        assert np.all(field.norm() == 5.0)
        assert np.all(field.dot((1.0, 0.0)) == 3.0)
        assert field.at((0.0, 0.0)).tolist() == [3.0, 4.0]

    def test_shape_mismatch_raises(self, square_grid):
        with pytest.raises(InvalidParameterError):
            VectorField(square_grid, np.zeros(square_grid.shape))


class TestBoundaryAssignment:
    """Tests for Dirichlet data containers."""

    def test_fill_places_data_on_boundary(self, ball_grid):
        n = len(ball_grid.boundary_indices)
        data = BoundaryAssignment(ball_grid, np.full(n, 2.0), source="2")
        full = data.fill(0.5)
        assert np.all(full[ball_grid.boundary] == 2.0)
        assert np.all(full[ball_grid.interior] == 0.5)
        assert np.all(np.isnan(full[~ball_grid.active]))

    def test_wrong_length_raises(self, ball_grid):
        with pytest.raises(InvalidParameterError):
            BoundaryAssignment(ball_grid, np.zeros(3))

    def test_non_finite_data_raises(self, ball_grid):
        values = np.zeros(len(ball_grid.boundary_indices))
        values[0] = np.nan
        with pytest.raises(InvalidParameterError):
            BoundaryAssignment(ball_grid, values)


def test_grid_type_is_hashable():
    """Grids key caches of cell operators."""
    assert {Grid(2, 17): 1}[Grid(2, 17)] == 1
