"""
Degeneracy kind enumeration.

Describes the shape of the set K of gradients where a Lagrangian fails to
be smooth and uniformly convex.
"""

from enum import Enum


class DegeneracyKind(Enum):
    """
    Shape of a degeneracy set.

    Attributes:
        EMPTY: F is uniformly convex everywhere.
        POINT: K is a single point (p-Laplace at the origin).
        CLOSED_BALL: K is a closed ball (congestion).
        FINITE_POINTS: K is a finite list of points.
        CUSTOM: K is given by an indicator and a distance function.
    """

    EMPTY = "empty"
    POINT = "point"
    CLOSED_BALL = "closed-ball"
    FINITE_POINTS = "finite-points"
    CUSTOM = "custom"

    def __str__(self) -> str:
        """Return human-readable kind name."""
        return self.value.upper()

    @property
    def is_empty(self) -> bool:
        """True when the Lagrangian is uniformly elliptic everywhere."""
        return self is DegeneracyKind.EMPTY
