"""
Tests for Lagrangian, DegeneracySet, GradientRegion and EllipticityWindow entities.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.domain.entities.lagrangian import DegeneracySet, EllipticityWindow, GradientRegion
from core.domain.exceptions import InvalidParameterError
from core.domain.value_objects.degeneracy_kind import DegeneracyKind

from .conftest import create_lagrangian

coordinate = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
gradient_pair = st.tuples(coordinate, coordinate)


class TestDegeneracySet:
    """Tests for degeneracy set distances and membership."""

    def test_empty_set_is_infinitely_far(self):
        d = DegeneracySet.empty().distance_to([[1.0, 2.0], [0.0, 0.0]])
        assert np.all(np.isinf(d))
        assert DegeneracySet.empty().kind.is_empty

    def test_point_distance(self):
        assert DegeneracySet.point().distance_to([3.0, 4.0]) == pytest.approx(5.0)
        assert DegeneracySet.point((1.0, 0.0)).distance_to([1.0, 0.0]) == 0.0

    def test_closed_ball_distance_and_contains(self):
        K = DegeneracySet.closed_ball(1.0)
        assert K.distance_to([0.5, 0.0]) == 0.0
        assert K.distance_to([3.0, 0.0]) == pytest.approx(2.0)
        assert K.contains([[1.0, 0.0], [1.5, 0.0]]).tolist() == [True, False]

    def test_finite_points_distance(self):
        K = DegeneracySet.finite_points([(0.0, 0.0), (2.0, 0.0)])
        assert K.distance_to([1.5, 0.0]) == pytest.approx(0.5)

    def test_custom_indicator_reports_zero_or_inf(self):
        K = DegeneracySet.custom("left half", indicator=lambda p: p[..., 0] <= 0)
        assert K.distance_to([[-1.0, 0.0], [1.0, 0.0]]).tolist() == [0.0, math.inf]

    def test_custom_needs_distance_or_indicator(self):
        with pytest.raises(InvalidParameterError):
            DegeneracySet.custom("nothing")

    def test_finite_points_needs_members(self):
        with pytest.raises(InvalidParameterError):
            DegeneracySet(kind=DegeneracyKind.FINITE_POINTS)

    def test_negative_radius_raises(self):
        with pytest.raises(InvalidParameterError):
            DegeneracySet.closed_ball(-1.0)

    @given(gradient_pair, gradient_pair)
    def test_distances_are_one_lipschitz(self, p, q):
        """|d(p) - d(q)| <= |p - q| for the closed-form sets."""
        gap = math.dist(p, q)
        for K in (DegeneracySet.point(), DegeneracySet.closed_ball(1.0),
                  DegeneracySet.finite_points([(0.0, 0.0), (1.0, 1.0)])):
            assert abs(float(K.distance_to(p)) - float(K.distance_to(q))) <= gap + 1e-12


class TestGradientRegion:
    """Tests for sampled gradient regions."""

    def test_ball_region_bounding_box(self):
        region = GradientRegion.ball(1.0, (1.0, 0.0))
        assert region.lower == (0.0, -1.0)
        assert region.upper == (2.0, 1.0)
        assert region.is_ball

    def test_ball_contains(self):
        region = GradientRegion.ball(1.0)
        assert region.contains([[0.5, 0.5], [0.9, 0.9]]).tolist() == [True, False]

    def test_box_contains_corners(self):
        region = GradientRegion.box((-1.0, -1.0), (1.0, 1.0))
        assert region.contains([[1.0, 1.0], [1.0, 1.01]]).tolist() == [True, False]

    def test_ball_anchors_include_centre_and_extremes(self):
        anchors = GradientRegion.ball(2.0).anchors()
        assert len(anchors) == 5
        assert [0.0, 0.0] in anchors.tolist()
        assert [2.0, 0.0] in anchors.tolist()

    def test_invalid_corners_raise(self):
        with pytest.raises(InvalidParameterError):
            GradientRegion.box((1.0, 0.0), (0.0, 1.0))

    def test_describe(self):
        assert GradientRegion.ball(1.0).describe() == "ball(center=(0,0), r=1)"
        assert GradientRegion.box((-1.0, -2.0), (1.0, 2.0)).describe() == "box([-1,-2], [1,2])"


class TestEllipticityWindow:
    """Tests for the eigenvalue window and its constants."""

    def test_normalized_lambda(self):
        window = EllipticityWindow(1.0, 4.0, "test")
        assert window.normalized_lambda == pytest.approx(0.5)
        assert window.ellipticity_constant == pytest.approx(0.25)

    def test_uniform_window(self):
        window = EllipticityWindow(2.0, 2.0, "quadratic")
        assert window.normalized_lambda == 1.0
        assert window.ellipticity_constant == 0.5

    def test_flat_window_has_zero_lambda(self):
        assert EllipticityWindow(0.0, 0.0, "congestion").normalized_lambda == 0.0

    def test_invalid_window_raises(self):
        with pytest.raises(InvalidParameterError):
            EllipticityWindow(2.0, 1.0, "bad")
        with pytest.raises(InvalidParameterError):
            EllipticityWindow(-1.0, 1.0, "bad")


class TestLagrangian:
    """Tests for the Lagrangian evaluator bundle."""

    def test_evaluates_batches(self):
        F = create_lagrangian()
        assert F.value([[1.0, 2.0], [0.0, 1.0]]).tolist() == [5.0, 1.0]
        assert F.gradient([1.0, 2.0]).tolist() == [2.0, 4.0]
        assert F.hessian([1.0, 2.0]).shape == (2, 2)

    def test_wrong_gradient_dimension_raises(self):
        with pytest.raises(InvalidParameterError):
            create_lagrangian().value([1.0, 2.0, 3.0])

    def test_empty_label_raises(self):
        with pytest.raises(InvalidParameterError):
            create_lagrangian(label="  ")

    def test_degenerate_flag(self):
        assert not create_lagrangian().is_degenerate
        assert create_lagrangian(degeneracy=DegeneracySet.point()).is_degenerate

    def test_smoothed_adds_eps_square(self):
        F = create_lagrangian(degeneracy=DegeneracySet.point())
        G = F.smoothed(0.5)
        assert float(G.value([1.0, 1.0])) == pytest.approx(3.0)
        assert G.gradient([1.0, 0.0]).tolist() == [3.0, 0.0]
        assert G.hessian([0.0, 0.0]).tolist() == [[3.0, 0.0], [0.0, 3.0]]
        assert not G.is_degenerate

    def test_smoothing_with_zero_returns_same(self):
        F = create_lagrangian()
        assert F.smoothed(0.0) is F

    def test_negative_smoothing_raises(self):
        with pytest.raises(InvalidParameterError):
            create_lagrangian().smoothed(-1.0)
