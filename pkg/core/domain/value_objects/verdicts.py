"""
Closed verdict enumerations returned by probes, sequence lemmas and the solver.
"""

from enum import Enum


class ChopVerdict(Enum):
    """Position of a gradient cloud relative to a strip a <= p.e <= a + gap."""

    BELOW = "below"
    ABOVE = "above"
    CROSSES = "crosses"

    def __str__(self) -> str:
        return self.value


class CircleVerdict(Enum):
    """Position of a gradient cloud relative to an annulus r_in <= |p - q| <= r_out."""

    INSIDE = "inside"
    OUTSIDE = "outside"
    CROSSES = "crosses"

    def __str__(self) -> str:
        return self.value


class SequenceVerdict(Enum):
    """
    Outcome of a De Giorgi sequence iteration.

    Attributes:
        CONVERGES: a_k tends to zero.
        BOUND_SATISFIED: a_k <= 1/(1 + ck) held at every step.
        DIVERGES: a_k does not tend to zero (or overflowed).
    """

    CONVERGES = "converges-to-zero"
    BOUND_SATISFIED = "bound-satisfied"
    DIVERGES = "diverges"

    def __str__(self) -> str:
        return self.value

    @property
    def is_success(self) -> bool:
        return self is not SequenceVerdict.DIVERGES


class SolveMethod(Enum):
    """Descent method used by the variational solver."""

    GRADIENT_DESCENT = "gradient-descent"
    NEWTON_DAMPED = "newton-damped"

    def __str__(self) -> str:
        return self.value
