"""
Grid mask enumerations.

MaskKind selects the domain realized on the square grid; NodeKind is the
per-node classification stored in the mask array.
"""

from enum import Enum, IntEnum


class MaskKind(Enum):
    """
    Domain realized by a grid.

    Attributes:
        BALL: Ball of radius half_width, boundary on the first masked ring.
        SQUARE: The full cube [-L, L]^n, boundary on its rim.
    """

    BALL = "ball"
    SQUARE = "square"

    def __str__(self) -> str:
        return self.value


class NodeKind(IntEnum):
    """Per-node flag of the grid mask (stored as int8)."""

    EXTERIOR = 0
    INTERIOR = 1
    BOUNDARY = 2
