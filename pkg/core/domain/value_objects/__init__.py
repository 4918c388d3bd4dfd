"""
Value objects for the regularity lab.

Immutable enumerations describing domains, degeneracy sets and verdicts.
"""

from core.domain.value_objects.degeneracy_kind import DegeneracyKind
from core.domain.value_objects.mask_kind import MaskKind, NodeKind
from core.domain.value_objects.verdicts import (
    ChopVerdict,
    CircleVerdict,
    SequenceVerdict,
    SolveMethod,
)

__all__ = [
    "DegeneracyKind",
    "MaskKind",
    "NodeKind",
    "ChopVerdict",
    "CircleVerdict",
    "SequenceVerdict",
    "SolveMethod",
]
