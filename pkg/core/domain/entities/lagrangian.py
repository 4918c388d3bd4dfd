"""
Lagrangian entities.

A Lagrangian is the integrand F of the variational integral J(u) = ∫ F(∇u).
It is carried as a bundle of vectorised evaluators (value, gradient,
Hessian) plus metadata about the set K where it degenerates.

All evaluators take an array of gradients with shape (..., dim) and return
arrays of shape (...), (..., dim) and (..., dim, dim) respectively.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.domain.exceptions import InvalidParameterError
from core.domain.value_objects.degeneracy_kind import DegeneracyKind

FloatArray = NDArray[np.float64]
GradientMap = Callable[[FloatArray], FloatArray]


def _as_points(p: ArrayLike, dim: int | None = None) -> FloatArray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if dim is not None and arr.shape[-1] != dim:
        raise InvalidParameterError(f"expected gradients of dimension {dim}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DegeneracySet:
    """
    The compact set K where F fails to be smooth and uniformly convex.

    Attributes:
        kind: Shape of the set.
        points: Centre (POINT, CLOSED_BALL) or member list (FINITE_POINTS).
            An empty tuple means the origin.
        radius: Radius for CLOSED_BALL.
        distance: Exact distance function for CUSTOM sets, or None when only
            an indicator is known.
        indicator: Membership test for CUSTOM sets without a distance.
        description: Free text shown in reports.
    """

    kind: DegeneracyKind
    points: tuple[tuple[float, ...], ...] = ()
    radius: float = 0.0
    distance: GradientMap | None = field(default=None, compare=False)
    indicator: Callable[[FloatArray], NDArray[np.bool_]] | None = field(default=None, compare=False)
    description: str = ""

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if self.radius < 0:
            raise InvalidParameterError("degeneracy radius must be non-negative")
        if self.kind is DegeneracyKind.FINITE_POINTS and not self.points:
            raise InvalidParameterError("finite-points degeneracy set needs at least one point")
        if self.kind is DegeneracyKind.CUSTOM and self.distance is None and self.indicator is None:
            raise InvalidParameterError("custom degeneracy set needs a distance or an indicator")

    @classmethod
    def empty(cls) -> DegeneracySet:
        return cls(kind=DegeneracyKind.EMPTY, description="empty")

    @classmethod
    def point(cls, center: tuple[float, ...] = ()) -> DegeneracySet:
        return cls(kind=DegeneracyKind.POINT, points=(tuple(center),) if center else (), description="point")

    @classmethod
    def closed_ball(cls, radius: float, center: tuple[float, ...] = ()) -> DegeneracySet:
        return cls(
            kind=DegeneracyKind.CLOSED_BALL,
            points=(tuple(center),) if center else (),
            radius=radius,
            description=f"closed ball of radius {radius:g}",
        )

    @classmethod
    def finite_points(cls, points: list[tuple[float, ...]]) -> DegeneracySet:
        return cls(
            kind=DegeneracyKind.FINITE_POINTS,
            points=tuple(tuple(p) for p in points),
            description=f"{len(points)} points",
        )

    @classmethod
    def custom(
        cls,
        description: str,
        distance: GradientMap | None = None,
        indicator: Callable[[FloatArray], NDArray[np.bool_]] | None = None,
    ) -> DegeneracySet:
        return cls(kind=DegeneracyKind.CUSTOM, distance=distance, indicator=indicator, description=description)

    def _center(self, p: FloatArray) -> FloatArray:
        if self.points:
            return np.asarray(self.points[0], dtype=float)
        return np.zeros(p.shape[-1])

    def distance_to(self, p: ArrayLike) -> FloatArray:
        """Distance from each gradient in ``p`` to K (+inf when K is empty).

        CUSTOM sets known only through an indicator report 0 inside and
        +inf outside.
        """
        pts = _as_points(p)
        kind = self.kind
        if kind is DegeneracyKind.EMPTY:
            return np.full(pts.shape[:-1], np.inf)
        if kind is DegeneracyKind.POINT:
            return np.linalg.norm(pts - self._center(pts), axis=-1)
        if kind is DegeneracyKind.CLOSED_BALL:
            return np.maximum(np.linalg.norm(pts - self._center(pts), axis=-1) - self.radius, 0.0)
        if kind is DegeneracyKind.FINITE_POINTS:
            members = np.asarray(self.points, dtype=float)
            gaps = np.linalg.norm(pts[..., None, :] - members, axis=-1)
            return gaps.min(axis=-1)
        if self.distance is not None:
            return np.asarray(self.distance(pts), dtype=float)
        inside = np.asarray(self.indicator(pts), dtype=bool)
        return np.where(inside, 0.0, np.inf)

    def contains(self, p: ArrayLike) -> NDArray[np.bool_]:
        return self.distance_to(p) <= 0.0


@dataclass(frozen=True)
class GradientRegion:
    """
    A region of gradient space sampled by ellipticity and convexity audits.

    The region is the box [lower, upper]; when ``radius`` is set it is the
    ball of that radius around ``center`` (the box is its bounding box).

    Attributes:
        lower: Lower corner of the bounding box.
        upper: Upper corner of the bounding box.
        center: Ball centre, or None for a box region.
        radius: Ball radius, or None for a box region.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    center: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper) or not self.lower:
            raise InvalidParameterError("region corners must have the same positive dimension")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise InvalidParameterError("region lower corner exceeds upper corner")
        if self.radius is not None and self.radius <= 0:
            raise InvalidParameterError("ball region radius must be positive")

    @classmethod
    def ball(cls, radius: float, center: tuple[float, ...] = (0.0, 0.0)) -> GradientRegion:
        lower = tuple(c - radius for c in center)
        upper = tuple(c + radius for c in center)
        return cls(lower=lower, upper=upper, center=tuple(center), radius=radius)

    @classmethod
    def box(cls, lower: tuple[float, ...], upper: tuple[float, ...]) -> GradientRegion:
        return cls(lower=tuple(lower), upper=tuple(upper))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def is_ball(self) -> bool:
        return self.radius is not None

    def contains(self, p: ArrayLike) -> NDArray[np.bool_]:
        pts = _as_points(p, self.dim)
        inside = np.all((pts >= np.asarray(self.lower)) & (pts <= np.asarray(self.upper)), axis=-1)
        if self.is_ball:
            inside &= np.linalg.norm(pts - np.asarray(self.center), axis=-1) <= self.radius
        return inside

    def anchors(self) -> FloatArray:
        """Deterministic points always included in samples: centre and axis extremes."""
        if self.is_ball:
            c = np.asarray(self.center, dtype=float)
            offsets = np.vstack([np.zeros(self.dim), np.eye(self.dim), -np.eye(self.dim)])
            return c + self.radius * offsets
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.vstack([(lo + hi) / 2, lo, hi])

    def describe(self) -> str:
        if self.is_ball:
            centre = ",".join(f"{c:g}" for c in self.center)
            return f"ball(center=({centre}), r={self.radius:g})"
        lo = ",".join(f"{c:g}" for c in self.lower)
        hi = ",".join(f"{c:g}" for c in self.upper)
        return f"box([{lo}], [{hi}])"


@dataclass(frozen=True)
class EllipticityWindow:
    """
    Range of Hessian eigenvalues of F over a sampled gradient region.

    Attributes:
        lambda_min: Smallest sampled eigenvalue (clipped at 0).
        lambda_max: Largest sampled eigenvalue.
        region: Description of the sampled region.
        degenerate: True when lambda_min vanishes (the region meets K).
        samples: Number of gradients sampled.
    """

    lambda_min: float
    lambda_max: float
    region: str
    degenerate: bool = False
    samples: int = 0

    def __post_init__(self) -> None:
        if self.lambda_min < 0:
            raise InvalidParameterError("lambda_min must be non-negative")
        if self.lambda_min > self.lambda_max:
            raise InvalidParameterError("lambda_min exceeds lambda_max")

    @property
    def normalized_lambda(self) -> float:
        """Scale-free ellipticity constant sqrt(lambda_min / lambda_max).

        The equation ∂(a ∂v) = 0 does not change when a is multiplied by a
        positive constant, so the audits use the λ of the rescaled window
        [λ, 1/λ].
        """
        if self.lambda_max <= 0:
            return 0.0
        return float(np.sqrt(self.lambda_min / self.lambda_max))

    @property
    def ellipticity_constant(self) -> float:
        """Largest λ with every eigenvalue in [λ, 1/λ] without rescaling."""
        if self.lambda_max <= 0:
            return 0.0
        return float(min(self.lambda_min, 1.0 / self.lambda_max))


@dataclass(frozen=True)
class ConvexProfile:
    """
    A one-dimensional even convex function H used by separable Lagrangians.

    Attributes:
        label: Name shown in reports.
        value: H, vectorised.
        derivative: H'.
        second_derivative: H''.
        degenerate_points: Points where H'' vanishes.
    """

    label: str
    value: Callable[[FloatArray], FloatArray] = field(compare=False)
    derivative: Callable[[FloatArray], FloatArray] = field(compare=False)
    second_derivative: Callable[[FloatArray], FloatArray] = field(compare=False)
    degenerate_points: tuple[float, ...] = ()


@dataclass(frozen=True, kw_only=True)
class Lagrangian:
    """
    Evaluator bundle for an integrand F(p).

    Attributes:
        dim: Dimension n of the gradient variable.
        value_at: p -> F(p).
        grad_at: p -> ∇F(p).
        hess_at: p -> D²F(p).
        degeneracy: Degeneracy set K.
        label: Name shown in reports (e.g. "p-laplace(p=4)").
        uniform_lambda: Reported ellipticity constant when K is empty.
        derivative_noise: Relative error of numeric derivatives (0 for
            closed forms); widens audit tolerances.

    Raises:
        InvalidParameterError: If dim < 1 or label is empty.
    """

    dim: int
    value_at: GradientMap = field(compare=False)
    grad_at: GradientMap = field(compare=False)
    hess_at: GradientMap = field(compare=False)
    degeneracy: DegeneracySet
    label: str
    uniform_lambda: float | None = None
    derivative_noise: float = 0.0

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError("Lagrangian dimension must be >= 1")
        if not self.label or not self.label.strip():
            raise InvalidParameterError("Lagrangian label cannot be empty")

    @property
    def is_degenerate(self) -> bool:
        return not self.degeneracy.kind.is_empty

    def value(self, p: ArrayLike) -> FloatArray:
        return np.asarray(self.value_at(_as_points(p, self.dim)), dtype=float)

    def gradient(self, p: ArrayLike) -> FloatArray:
        return np.asarray(self.grad_at(_as_points(p, self.dim)), dtype=float)

    def hessian(self, p: ArrayLike) -> FloatArray:
        return np.asarray(self.hess_at(_as_points(p, self.dim)), dtype=float)

    def smoothed(self, eps: float) -> Lagrangian:
        """Return F_eps = F + eps |p|², which is uniformly convex for eps > 0."""
        if eps < 0:
            raise InvalidParameterError("smoothing eps must be non-negative")
        if eps == 0:
            return self
        eye = np.eye(self.dim)
        return Lagrangian(
            dim=self.dim,
            value_at=lambda p: self.value_at(p) + eps * np.sum(p * p, axis=-1),
            grad_at=lambda p: self.grad_at(p) + 2.0 * eps * p,
            hess_at=lambda p: self.hess_at(p) + 2.0 * eps * eye,
            degeneracy=DegeneracySet.empty(),
            label=f"{self.label}+{eps:g}|p|^2",
            derivative_noise=self.derivative_noise,
        )
