"""
Domain errors for the regularity lab.

Every failure a core operation can report has its own class so callers
(the CLI in particular) can map them to messages and exit codes without
string matching.
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for all errors raised by the core package."""


class InvalidParameterError(LabError, ValueError):
    """A numeric parameter is outside its admissible range."""


class UnknownLagrangianError(LabError):
    """The requested builtin Lagrangian or convex profile does not exist."""


class InversionFailureError(LabError):
    """A monotone inversion could not bracket its root."""


class OutOfDomainError(LabError):
    """A ball or point leaves the grid domain."""


class BoundaryEvaluationError(LabError):
    """Boundary data could not be evaluated at a boundary node.

    Attributes:
        node: Coordinates of the offending (projected) boundary node.
    """

    def __init__(self, message: str, node: tuple[float, ...] | None = None) -> None:
        super().__init__(message)
        self.node = node


class ParseError(LabError):
    """Syntax error in an expression.

    Attributes:
        offset: Byte offset of the offending token in the source text.
        expected: Token kinds that would have been accepted at ``offset``.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = expected


class EvaluationError(LabError):
    """An expression hit a domain fault (log <= 0, sqrt < 0, division by zero...).

    Attributes:
        index: Flat index of the first faulting entry for vectorised
            evaluation, or None for scalar evaluation.
    """

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class InsufficientResolutionError(LabError):
    """The grid does not resolve the requested ball or scale."""


class InvalidTestFunctionError(LabError):
    """A weak-residual test function does not vanish near the boundary."""


class NonConvexLagrangianError(LabError):
    """The convexity audit of a Lagrangian failed; the solver refuses it."""


class NotApplicableError(LabError):
    """A diagnostic's precondition does not hold for the given input."""


class EmptyCloudError(LabError):
    """A gradient cloud has no points."""


class SingularPointError(LabError):
    """A homogeneous function was evaluated at the origin."""


class NotEllipticError(LabError):
    """A coefficient field has a non-positive eigenvalue."""
