"""
Pytest configuration and fixtures for regularity lab tests.
"""

import logging

import numpy as np
import pytest

from core.domain.entities.grid import Grid
from core.domain.entities.lagrangian import DegeneracySet, Lagrangian
from core.domain.value_objects.mask_kind import MaskKind
from core.services.field_calculus import FieldCalculus
from core.services.lagrangian_catalog import LagrangianCatalog
from core.services.variational_solver import SolveOptions, VariationalSolver


def create_grid(
    resolution: int = 33,
    mask_kind: MaskKind = MaskKind.BALL,
    dim: int = 2,
    half_width: float = 1.0,
) -> Grid:
    """Factory function to create a Grid with sensible defaults."""
    return Grid(dim=dim, resolution=resolution, mask_kind=mask_kind, half_width=half_width)


def create_field(src: str, resolution: int = 33, mask_kind: MaskKind = MaskKind.BALL, half_width: float = 1.0):
    """Factory function to sample an expression on a fresh grid."""
    return FieldCalculus.field_from_expression(create_grid(resolution, mask_kind, half_width=half_width), src)


def create_concave() -> Lagrangian:
    """Factory function to create the non-convex test double F(p) = -|p|²."""
    eye = np.eye(2)
    return Lagrangian(
        dim=2,
        value_at=lambda p: -np.sum(p * p, axis=-1),
        grad_at=lambda p: -2.0 * p,
        hess_at=lambda p: np.broadcast_to(-2.0 * eye, (*p.shape, 2)).copy(),
        degeneracy=DegeneracySet.empty(),
        label="concave",
    )


@pytest.fixture(autouse=True)
def lab_logs_reach_caplog(monkeypatch):
    """settings.LOGGING stops the lab loggers at their console handler; let records reach caplog."""
    for name in ("core", "etl", "infrastructure"):
        monkeypatch.setattr(logging.getLogger(name), "propagate", True)


@pytest.fixture
def ball_grid():
    """Unit-disk grid with h = 1/16."""
    return create_grid(33)


@pytest.fixture
def fine_ball_grid():
    """Unit-disk grid with h = 1/32."""
    return create_grid(65)


@pytest.fixture
def square_grid():
    """Square grid on [-1, 1]² with h = 1/16."""
    return create_grid(33, MaskKind.SQUARE)


@pytest.fixture
def wide_ball_grid():
    """Disk of radius 2 with h = 1/16, covering B_2."""
    return create_grid(65, half_width=2.0)


@pytest.fixture(scope="session")
def harmonic_solution():
    """Minimizer of ∫|∇u|² with data x² - y² on the square, h = 1/32."""
    grid = create_grid(65, MaskKind.SQUARE)
    F = LagrangianCatalog.make_builtin("quadratic")
    boundary = FieldCalculus.trace_boundary(grid, "x^2-y^2")
    return VariationalSolver.minimize(F, grid, boundary, SolveOptions())
