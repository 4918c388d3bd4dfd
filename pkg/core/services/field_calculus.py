"""
Discrete calculus on uniform grids.

Node-based derivatives, ball quadrature, cutoff and bump test functions,
and Dirichlet traces of boundary expressions.

NO dependencies on the solver, probe or I/O layers.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.domain.entities.expression import SPATIAL_VARIABLES, Expression
from core.domain.entities.grid import BoundaryAssignment, Grid, ScalarField, VectorField
from core.domain.exceptions import (
    BoundaryEvaluationError,
    EvaluationError,
    InvalidParameterError,
    OutOfDomainError,
)
from core.services.expression_engine import ExpressionEngine

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


# ---------------------------------------------------------------------------
# Stencils
# ---------------------------------------------------------------------------

def _shifted(values: FloatArray, axis: int, offset: int) -> FloatArray:
    """values[i + offset] along ``axis``, NaN past the grid edge."""
    pad = [(0, 0)] * values.ndim
    pad[axis] = (2, 2)
    padded = np.pad(values, pad, constant_values=np.nan)
    index = [slice(None)] * values.ndim
    index[axis] = slice(2 + offset, 2 + offset + values.shape[axis])
    return padded[tuple(index)]


def axis_derivative(values: FloatArray, active: NDArray[np.bool_], axis: int, h: float) -> FloatArray:
    """∂/∂x_axis at active nodes.

    Centered where both neighbours are active, one-sided second order where
    only one side has two active nodes, one-sided first order after that and
    0 for isolated nodes. Exterior nodes get NaN.
    """
    v = np.where(active, values, np.nan)
    f0 = v
    fp1, fm1 = _shifted(v, axis, 1), _shifted(v, axis, -1)
    fp2, fm2 = _shifted(v, axis, 2), _shifted(v, axis, -2)
    with np.errstate(invalid="ignore"):
        candidates = (
            (fp1 - fm1) / (2.0 * h),
            (-3.0 * f0 + 4.0 * fp1 - fp2) / (2.0 * h),
            (3.0 * f0 - 4.0 * fm1 + fm2) / (2.0 * h),
            (fp1 - f0) / h,
            (f0 - fm1) / h,
        )
    out = np.zeros(values.shape)
    filled = np.zeros(values.shape, dtype=bool)
    for candidate in candidates:
        usable = ~filled & np.isfinite(candidate)
        out[usable] = candidate[usable]
        filled |= usable
    out[~active] = np.nan
    return out


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class FieldCalculus:
    """Grid operators used by the solver and the probes."""

    @staticmethod
    def gradient(f: ScalarField) -> VectorField:
        """Node gradient; exact on affine fields and, at centered nodes, on quadratics."""
        grid = f.grid
        parts = [axis_derivative(f.values, grid.active, k, grid.h) for k in range(grid.dim)]
        return VectorField(grid, np.stack(parts, axis=-1))

    @staticmethod
    def divergence(G: VectorField) -> ScalarField:
        grid = G.grid
        total = np.zeros(grid.shape)
        for k in range(grid.dim):
            total += axis_derivative(G.values[..., k], grid.active, k, grid.h)
        return ScalarField(grid, np.nan_to_num(total, nan=0.0))

    @staticmethod
    def ball_sum(grid: Grid, values: ArrayLike, center: ArrayLike, r: float) -> float:
        """h^n-weighted sum of node values over the closed discrete ball.

        Raises:
            OutOfDomainError: If B_r(center) leaves the domain.
        """
        if not grid.ball_inside_domain(center, r):
            raise OutOfDomainError(f"ball of radius {r} at {tuple(np.ravel(center))} leaves the domain")
        arr = np.asarray(values, dtype=float)
        inside = grid.ball_nodes(center, r)
        return float(np.sum(arr[inside]) * grid.h**grid.dim)

    @staticmethod
    def integrate(f: ScalarField, center: ArrayLike | None = None, r: float | None = None) -> float:
        """∫_{B_r(center)} f, defaulting to the whole ball of radius half_width at 0."""
        grid = f.grid
        c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
        radius = grid.half_width if r is None else r
        return FieldCalculus.ball_sum(grid, f.values, c, radius)

    @staticmethod
    def cutoff(grid: Grid, r_in: float, r_out: float, center: ArrayLike | None = None) -> ScalarField:
        """ψ = 1 on B_{r_in}, 0 outside B_{r_out}, radially linear in between.

        Raises:
            InvalidParameterError: Unless 0 < r_in < r_out <= half_width.
        """
        if not 0 < r_in < r_out <= grid.half_width:
            raise InvalidParameterError(f"cutoff needs 0 < r_in < r_out <= {grid.half_width}, got {r_in}, {r_out}")
        c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
        dist = np.linalg.norm(grid.coordinates - c, axis=-1)
        psi = np.clip((r_out - dist) / (r_out - r_in), 0.0, 1.0)
        return ScalarField(grid, psi)

    @staticmethod
    def bump(grid: Grid, center: ArrayLike, radius: float) -> ScalarField:
        """Smooth bump exp(1 - 1/(1 - (d/radius)^2)) with peak 1, zero for d >= radius."""
        if radius <= 0:
            raise InvalidParameterError("bump radius must be positive")
        c = np.asarray(center, dtype=float)
        s = np.linalg.norm(grid.coordinates - c, axis=-1) / radius
        inside = s < 1.0
        values = np.zeros(grid.shape)
        values[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return ScalarField(grid, values)

    @staticmethod
    def trace_boundary(grid: Grid, expr: Expression | str) -> BoundaryAssignment:
        """Evaluate φ at the boundary nodes (projected to the sphere on ball grids).

        Raises:
            ParseError: If ``expr`` is text that does not parse.
            BoundaryEvaluationError: On a domain fault, with the node location.
        """
        variables = SPATIAL_VARIABLES[: grid.dim]
        tree = ExpressionEngine.parse(expr, variables) if isinstance(expr, str) else expr
        points = grid.boundary_points()
        try:
            compiled = ExpressionEngine.compile(tree, variables)
            values = compiled(points)
        except EvaluationError as exc:
            index = exc.index if exc.index is not None and exc.index < len(points) else 0
            node = tuple(float(c) for c in points[index])
            raise BoundaryEvaluationError(f"boundary data failed: {exc}", node=node) from exc
        return BoundaryAssignment(grid, values, source=ExpressionEngine.to_source(tree))

    @staticmethod
    def field_from_function(grid: Grid, func: Callable[[FloatArray], FloatArray]) -> ScalarField:
        """Sample ``func(points)`` (points of shape (..., dim)) at active nodes."""
        values = np.full(grid.shape, np.nan)
        values[grid.active] = np.asarray(func(grid.coordinates[grid.active]), dtype=float)
        return ScalarField(grid, values)

    @staticmethod
    def field_from_expression(grid: Grid, src: str) -> ScalarField:
        variables = SPATIAL_VARIABLES[: grid.dim]
        compiled = ExpressionEngine.compile(ExpressionEngine.parse(src, variables), variables)
        return FieldCalculus.field_from_function(grid, compiled)
