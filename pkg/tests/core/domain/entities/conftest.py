"""
Pytest fixtures for domain entity tests.

Provides factory functions and fixtures for creating test entities.
"""

import numpy as np
import pytest

from core.domain.entities.grid import Grid, ScalarField
from core.domain.entities.lagrangian import DegeneracySet, Lagrangian
from core.domain.entities.reports import ProbeReport
from core.domain.value_objects.mask_kind import MaskKind


def create_grid(
    resolution: int = 17,
    mask_kind: MaskKind = MaskKind.BALL,
    dim: int = 2,
    half_width: float = 1.0,
) -> Grid:
    """Factory function to create a Grid with sensible defaults."""
    return Grid(dim=dim, resolution=resolution, mask_kind=mask_kind, half_width=half_width)


def create_field(grid: Grid | None = None, fill: float = 1.0) -> ScalarField:
    """Factory function to create a constant ScalarField."""
    grid = grid or create_grid()
    return ScalarField(grid, np.full(grid.shape, fill))


def create_lagrangian(
    label: str = "test-quadratic",
    degeneracy: DegeneracySet | None = None,
    dim: int = 2,
) -> Lagrangian:
    """Factory function to create F(p) = |p|² with sensible defaults."""
    eye = np.eye(dim)
    return Lagrangian(
        dim=dim,
        value_at=lambda p: np.sum(p * p, axis=-1),
        grad_at=lambda p: 2.0 * p,
        hess_at=lambda p: np.broadcast_to(2.0 * eye, (*p.shape, dim)).copy(),
        degeneracy=degeneracy or DegeneracySet.empty(),
        label=label,
    )


def create_report(name: str = "probe", margin: float = 0.5, **measured: float) -> ProbeReport:
    """Factory function to create a ProbeReport from its margin."""
    return ProbeReport.from_margin(name, measured or {"ratio": 0.5}, margin)


@pytest.fixture
def ball_grid():
    """Unit-disk grid with h = 1/8."""
    return create_grid()


@pytest.fixture
def square_grid():
    """Square grid with h = 1/8."""
    return create_grid(mask_kind=MaskKind.SQUARE)
