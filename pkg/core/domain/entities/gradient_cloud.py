"""
Gradient cloud entity: the multiset ∇u(B_r(center)) sampled on grid nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from core.domain.exceptions import InvalidParameterError

# Below this many distinct points the diameter is taken over all pairs.
PAIRWISE_LIMIT: int = 2000


def exact_diameter(points: NDArray[np.float64]) -> float:
    """Largest pairwise distance of a finite point set.

    The farthest pair of a finite set is a pair of convex hull vertices, so
    large clouds only compare hull vertices. Flat clouds (where Qhull
    refuses) are reduced to their affine span first.
    """
    if len(points) < 2:
        return 0.0
    distinct = np.unique(points, axis=0)
    if len(distinct) < 2:
        return 0.0
    if len(distinct) <= PAIRWISE_LIMIT:
        return float(pdist(distinct).max())
    try:
        vertices = ConvexHull(distinct).vertices
    except QhullError:
        centred = distinct - distinct.mean(axis=0)
        _, singular, basis = np.linalg.svd(centred, full_matrices=False)
        rank = int(np.sum(singular > 1e-12 * singular[0]))
        projected = centred @ basis[:rank].T
        if rank == 1:
            order = np.argsort(projected[:, 0])
            return float(np.linalg.norm(distinct[order[-1]] - distinct[order[0]]))
        vertices = ConvexHull(projected).vertices
    return float(pdist(distinct[vertices]).max())


@dataclass(frozen=True, eq=False)
class GradientCloud:
    """
    Gradients of a field at the interior nodes of a ball.

    Attributes:
        points: Array (m, n) of gradient vectors (read-only).
        center: Ball centre in x-space.
        r: Ball radius in x-space.
        diameter: Exact max pairwise distance of the points.
        lower: Componentwise minimum of the points.
        upper: Componentwise maximum of the points.
    """

    points: NDArray[np.float64] = field(repr=False)
    center: tuple[float, ...]
    r: float
    diameter: float = field(init=False)
    lower: tuple[float, ...] = field(init=False)
    upper: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2:
            raise InvalidParameterError("cloud points must be an (m, n) array")
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("cloud points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "diameter", exact_diameter(pts))
        if len(pts):
            object.__setattr__(self, "lower", tuple(float(v) for v in pts.min(axis=0)))
            object.__setattr__(self, "upper", tuple(float(v) for v in pts.max(axis=0)))
        else:
            object.__setattr__(self, "lower", ())
            object.__setattr__(self, "upper", ())

    def __len__(self) -> int:
        return len(self.points)

    def translated(self, shift: NDArray[np.float64]) -> GradientCloud:
        return GradientCloud(self.points + np.asarray(shift, dtype=float), self.center, self.r)
