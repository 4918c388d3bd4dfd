"""
Grid and field entities.

A Grid is a uniform node lattice over [-L, L]^n with a per-node mask that
realizes either the ball of radius L or the full cube. Fields store one
value (or vector) per node; exterior nodes hold NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from core.domain.exceptions import InvalidParameterError, OutOfDomainError
from core.domain.value_objects.mask_kind import MaskKind, NodeKind

MIN_RESOLUTION: int = 9
MAX_DIM: int = 4


@dataclass(frozen=True)
class Grid:
    """
    Uniform grid on [-half_width, half_width]^dim.

    Attributes:
        dim: Spatial dimension (1 to 4).
        resolution: Nodes per axis; odd so that the origin is a node.
        mask_kind: BALL or SQUARE.
        half_width: L; the spacing is h = 2L / (resolution - 1).

    Raises:
        InvalidParameterError: If resolution is even or below 9, dim is out
            of range, or half_width is not positive.
    """

    dim: int
    resolution: int
    mask_kind: MaskKind = MaskKind.BALL
    half_width: float = 1.0

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if not 1 <= self.dim <= MAX_DIM:
            raise InvalidParameterError(f"grid dimension must be in 1..{MAX_DIM}")
        if self.resolution < MIN_RESOLUTION or self.resolution % 2 == 0:
            raise InvalidParameterError(f"resolution must be odd and >= {MIN_RESOLUTION}, got {self.resolution}")
        if not self.half_width > 0:
            raise InvalidParameterError("half_width must be positive")

    # -- geometry ---------------------------------------------------------

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.resolution - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution,) * self.dim

    @property
    def size(self) -> int:
        return self.resolution**self.dim

    @cached_property
    def axis(self) -> NDArray[np.float64]:
        return np.linspace(-self.half_width, self.half_width, self.resolution)

    @cached_property
    def coordinates(self) -> NDArray[np.float64]:
        """Node coordinates, shape (*shape, dim), axis k varying along index k."""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def radius(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.coordinates, axis=-1)

    # -- mask -------------------------------------------------------------

    @cached_property
    def mask(self) -> NDArray[np.int8]:
        if self.mask_kind is MaskKind.BALL:
            interior = self.radius < self.half_width
            # Full 3^n neighbourhood: every interior node is a corner of 2^n complete cells.
            neighbourhood = np.ones((3,) * self.dim, dtype=bool)
            boundary = ndimage.binary_dilation(interior, structure=neighbourhood) & ~interior
        else:
            interior = np.zeros(self.shape, dtype=bool)
            interior[(slice(1, -1),) * self.dim] = True
            boundary = ~interior
        mask = np.full(self.shape, NodeKind.EXTERIOR, dtype=np.int8)
        mask[interior] = NodeKind.INTERIOR
        mask[boundary] = NodeKind.BOUNDARY
        return mask

    @property
    def interior(self) -> NDArray[np.bool_]:
        return self.mask == NodeKind.INTERIOR

    @property
    def boundary(self) -> NDArray[np.bool_]:
        return self.mask == NodeKind.BOUNDARY

    @property
    def active(self) -> NDArray[np.bool_]:
        """Interior and boundary nodes (where fields carry finite values)."""
        return self.mask != NodeKind.EXTERIOR

    @cached_property
    def boundary_indices(self) -> NDArray[np.intp]:
        """Flat (C order) indices of boundary nodes."""
        return np.flatnonzero(self.boundary)

    @cached_property
    def interior_indices(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.interior)

    def boundary_points(self) -> NDArray[np.float64]:
        """Points where boundary data is evaluated.

        Ball grids project each boundary node radially onto the sphere of
        radius half_width; square grids use the node itself.
        """
        nodes = self.coordinates.reshape(-1, self.dim)[self.boundary_indices]
        if self.mask_kind is MaskKind.SQUARE:
            return nodes
        norms = np.linalg.norm(nodes, axis=-1, keepdims=True)
        return nodes * (self.half_width / norms)

    # -- lookups ----------------------------------------------------------

    def index_of(self, point: ArrayLike) -> tuple[int, ...]:
        """Index of the node nearest to ``point``.

        Raises:
            OutOfDomainError: If the point lies outside the grid box.
        """
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dim,):
            raise InvalidParameterError(f"point must have {self.dim} coordinates")
        idx = np.rint((x + self.half_width) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.resolution):
            raise OutOfDomainError(f"point {tuple(x)} lies outside the grid")
        return tuple(int(i) for i in idx)

    def ball_inside_domain(self, center: ArrayLike, r: float) -> bool:
        c = np.asarray(center, dtype=float)
        slack = 1e-12
        if self.mask_kind is MaskKind.BALL:
            return float(np.linalg.norm(c)) + r <= self.half_width + slack
        return bool(np.all(np.abs(c) + r <= self.half_width + slack))

    def ball_nodes(self, center: ArrayLike, r: float, *, strict: bool = False) -> NDArray[np.bool_]:
        """Active nodes with |x - center| <= r (or < r when ``strict``)."""
        c = np.asarray(center, dtype=float)
        dist = np.linalg.norm(self.coordinates - c, axis=-1)
        inside = dist < r - 1e-12 if strict else dist <= r + 1e-12
        return inside & self.active

    def header(self) -> str:
        text = f"# dim={self.dim} res={self.resolution} mask={self.mask_kind.value}"
        if self.half_width != 1.0:
            text += f" half_width={self.half_width!r}"
        return text


def _frozen_copy(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """
    Node values of a scalar function on a grid.

    Exterior nodes are forced to NaN; interior and boundary nodes must be
    finite.

    Attributes:
        grid: Underlying grid.
        values: Array of shape grid.shape (read-only).
    """

    grid: Grid
    values: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.shape != self.grid.shape:
            raise InvalidParameterError(f"field shape {arr.shape} does not match grid {self.grid.shape}")
        arr[~self.grid.active] = np.nan
        if not np.all(np.isfinite(arr[self.grid.active])):
            raise InvalidParameterError("field values must be finite on interior and boundary nodes")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def at(self, point: ArrayLike) -> float:
        return float(self.values[self.grid.index_of(point)])

    def active_values(self) -> NDArray[np.float64]:
        return self.values[self.grid.active]

    def with_values(self, values: ArrayLike) -> ScalarField:
        return ScalarField(self.grid, values)

    def __add__(self, other: ScalarField | float) -> ScalarField:
        rhs = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values + rhs)

    def __sub__(self, other: ScalarField | float) -> ScalarField:
        rhs = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values - rhs)

    def __mul__(self, factor: float) -> ScalarField:
        return ScalarField(self.grid, self.values * factor)

    __rmul__ = __mul__

    def __neg__(self) -> ScalarField:
        return ScalarField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    """
    Node values of a vector function (gradients, fluxes).

    Attributes:
        grid: Underlying grid.
        values: Array of shape (*grid.shape, grid.dim) (read-only).
    """

    grid: Grid
    values: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True)
        expected = (*self.grid.shape, self.grid.dim)
        if arr.shape != expected:
            raise InvalidParameterError(f"vector field shape {arr.shape} does not match {expected}")
        if not np.all(np.isfinite(arr[self.grid.interior])):
            raise InvalidParameterError("vector field must be finite on interior nodes")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def at(self, point: ArrayLike) -> NDArray[np.float64]:
        return self.values[self.grid.index_of(point)]

    def norm(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.values, axis=-1)

    def dot(self, direction: ArrayLike) -> NDArray[np.float64]:
        return self.values @ np.asarray(direction, dtype=float)


@dataclass(frozen=True, eq=False)
class BoundaryAssignment:
    """
    Dirichlet data on the boundary nodes of a grid.

    Attributes:
        grid: Underlying grid.
        values: One value per entry of grid.boundary_indices.
        source: Expression text the data came from (for reports).
    """

    grid: Grid
    values: NDArray[np.float64] = field(repr=False)
    source: str = ""

    def __post_init__(self) -> None:
        arr = _frozen_copy(self.values)
        if arr.shape != self.grid.boundary_indices.shape:
            raise InvalidParameterError("boundary data does not match the grid boundary")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("boundary values must be finite")
        object.__setattr__(self, "values", arr)

    def fill(self, interior: ArrayLike | float = 0.0) -> NDArray[np.float64]:
        """Full node array with boundary data and the given interior values."""
        full = np.full(self.grid.size, np.nan)
        full[self.grid.interior_indices] = interior
        full[self.grid.boundary_indices] = self.values
        return full.reshape(self.grid.shape)
