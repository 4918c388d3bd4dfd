"""
Homogeneous functions and their hedgehog clouds.

A HomogeneousFunction is u(x) = |x|^degree · g(x/|x|) for a trace g on the
unit sphere. With degree 1 its gradient image ∇u(S^{n-1}) is the hedgehog
hypersurface.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.domain.exceptions import InvalidParameterError, SingularPointError

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class HomogeneousFunction:
    """
    u(x) = |x|^degree · g(x/|x|).

    Attributes:
        dim: Dimension n.
        trace: g, vectorised over unit vectors of shape (..., n).
        degree: Homogeneity degree (1 for hedgehogs).
        label: Name shown in reports.
        closed_form: Exact formula for u when one is known; used in place
            of the trace so that symmetries hold bit for bit.
    """

    dim: int
    trace: Callable[[FloatArray], FloatArray] = field(compare=False)
    degree: float = 1.0
    label: str = "homogeneous"
    closed_form: Callable[[FloatArray], FloatArray] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError("dimension must be >= 1")
        if not self.degree >= 0:
            raise InvalidParameterError("homogeneity degree must be non-negative")

    def value(self, x: ArrayLike) -> FloatArray:
        """Evaluate u at points of shape (..., n).

        Raises:
            SingularPointError: If any point is the origin.
        """
        pts = np.asarray(x, dtype=float)
        if pts.shape[-1] != self.dim:
            raise InvalidParameterError(f"points must have {self.dim} coordinates")
        norms = np.linalg.norm(pts, axis=-1)
        if np.any(norms == 0):
            raise SingularPointError("homogeneous function evaluated at the origin")
        if self.closed_form is not None:
            return np.asarray(self.closed_form(pts), dtype=float)
        unit = pts / norms[..., None]
        if self.degree == 0.0:
            return np.asarray(self.trace(unit), dtype=float)
        scale = norms if self.degree == 1.0 else norms**self.degree
        return scale * np.asarray(self.trace(unit), dtype=float)


@dataclass(frozen=True, eq=False)
class HedgehogCloud:
    """
    Sampled hedgehog of a one-homogeneous function.

    Attributes:
        points: Sphere samples x_i, shape (m, n).
        images: Gradient images ∇u(x_i).
        normals: Estimated unit normals of the image hypersurface.
        residuals: Tangent-fit residual per point (NaN when no fit exists).
        singular: True where no reliable tangent fit exists (see
            Hedgehog.hedgehog_cloud).
        orientation: Sign of the Jacobian of x -> ∇u(x) on the tangent
            space, fitted from neighbouring samples (0 when undefined).
        labels: Connected-component label per point (-1 for singular points).
        components: Number of components among non-singular points.
        seed: Seed used for the sphere samples.
    """

    points: FloatArray = field(repr=False)
    images: FloatArray = field(repr=False)
    normals: FloatArray = field(repr=False)
    residuals: FloatArray = field(repr=False)
    singular: NDArray[np.bool_] = field(repr=False)
    orientation: NDArray[np.int_] = field(repr=False)
    labels: NDArray[np.int_] = field(repr=False)
    components: int = 0
    seed: int = 1

    def __post_init__(self) -> None:
        norms = np.linalg.norm(self.points, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise InvalidParameterError("hedgehog sample points must lie on the unit sphere")
        m = len(self.points)
        for name in ("images", "normals"):
            if getattr(self, name).shape != self.points.shape:
                raise InvalidParameterError(f"{name} must match the sample array")
        for name in ("residuals", "singular", "orientation", "labels"):
            if len(getattr(self, name)) != m:
                raise InvalidParameterError(f"{name} must have one entry per sample")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def regular_count(self) -> int:
        return int(np.count_nonzero(~self.singular))
