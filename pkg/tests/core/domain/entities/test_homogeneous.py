"""
Tests for HomogeneousFunction and HedgehogCloud.
"""

import numpy as np
import pytest

from core.domain.entities.homogeneous import HedgehogCloud, HomogeneousFunction
from core.domain.exceptions import InvalidParameterError, SingularPointError


def create_function(degree: float = 1.0, dim: int = 2) -> HomogeneousFunction:
    """Factory function to create |x|^degree · x_1/|x| with sensible defaults."""
    return HomogeneousFunction(dim=dim, trace=lambda w: w[..., 0], degree=degree, label="first-coordinate")


def create_cloud(m: int = 4, **overrides) -> HedgehogCloud:
    """Factory function to create a consistent HedgehogCloud on the circle."""
    angles = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    points = np.column_stack([np.cos(angles), np.sin(angles)])
    fields = {
        "points": points,
        "images": points.copy(),
        "normals": points.copy(),
        "residuals": np.zeros(m),
        "singular": np.zeros(m, dtype=bool),
        "orientation": np.ones(m, dtype=int),
        "labels": np.zeros(m, dtype=int),
        "components": 1,
    }
    fields.update(overrides)
    return HedgehogCloud(**fields)


class TestHomogeneousFunction:
    """Tests for homogeneous function evaluation."""

    def test_degree_one_scales_linearly(self):
        u = create_function()
        assert u.value([[3.0, 4.0]]).tolist() == pytest.approx([3.0])
        assert u.value([[6.0, 8.0]]).tolist() == pytest.approx([6.0])

    def test_degree_zero_ignores_radius(self):
        u = create_function(0.0)
        assert u.value([[0.5, 0.0], [4.0, 0.0]]).tolist() == [1.0, 1.0]

    def test_fractional_degree(self):
        u = create_function(0.5)
        assert u.value([[4.0, 0.0]]).tolist() == pytest.approx([2.0])

    def test_closed_form_takes_precedence(self):
        u = HomogeneousFunction(dim=2, trace=lambda w: w[..., 0], closed_form=lambda x: np.abs(x[..., 1]))
        assert u.value([[1.0, -2.0]]).tolist() == [2.0]

    def test_origin_raises(self):
        with pytest.raises(SingularPointError):
            create_function().value([[0.0, 0.0]])

    def test_wrong_dimension_raises(self):
        with pytest.raises(InvalidParameterError):
            create_function().value([[1.0, 0.0, 0.0]])

    def test_negative_degree_raises(self):
        with pytest.raises(InvalidParameterError):
            create_function(-1.0)


class TestHedgehogCloud:
    """Tests for HedgehogCloud validation."""

    def test_counts(self):
        cloud = create_cloud(singular=np.array([True, False, False, False]))
        assert cloud.dim == 2
        assert cloud.regular_count == 3

    def test_points_off_sphere_raise(self):
        with pytest.raises(InvalidParameterError):
            create_cloud(points=2.0 * create_cloud().points)

    def test_mismatched_images_raise(self):
        with pytest.raises(InvalidParameterError):
            create_cloud(images=np.zeros((3, 2)))

    def test_mismatched_labels_raise(self):
        with pytest.raises(InvalidParameterError):
            create_cloud(labels=np.zeros(2, dtype=int))

    def test_mismatched_orientation_raises(self):
        with pytest.raises(InvalidParameterError):
            create_cloud(orientation=np.ones(3, dtype=int))
