"""
Expression syntax tree.

Nodes are immutable dataclasses, so two parses of the same text compare
equal. ``to_source`` prints the canonical fully parenthesised form.
"""

from __future__ import annotations

from dataclasses import dataclass

# Builtin functions and their arities.
FUNCTION_ARITY: dict[str, int] = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "min": 2,
    "max": 2,
    "atan2": 2,
}

CONSTANTS: frozenset[str] = frozenset({"pi"})

SPATIAL_VARIABLES: tuple[str, ...] = ("x", "y", "z", "w")

BINARY_OPERATORS: frozenset[str] = frozenset({"+", "-", "*", "/", "^"})


@dataclass(frozen=True)
class Number:
    value: float

    def to_source(self) -> str:
        return repr(float(self.value))


@dataclass(frozen=True)
class Variable:
    name: str

    def to_source(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    name: str

    def to_source(self) -> str:
        return self.name


@dataclass(frozen=True)
class Negate:
    operand: Expression

    def to_source(self) -> str:
        return f"(-{self.operand.to_source()})"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: Expression
    right: Expression

    def __post_init__(self) -> None:
        if self.op not in BINARY_OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}")

    def to_source(self) -> str:
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"


@dataclass(frozen=True)
class Call:
    function: str
    args: tuple[Expression, ...]

    def __post_init__(self) -> None:
        arity = FUNCTION_ARITY.get(self.function)
        if arity is None:
            raise ValueError(f"unknown function {self.function!r}")
        if arity != len(self.args):
            raise ValueError(f"{self.function} takes {arity} argument(s), got {len(self.args)}")

    def to_source(self) -> str:
        inner = ", ".join(arg.to_source() for arg in self.args)
        return f"{self.function}({inner})"


Expression = Number | Variable | Constant | Negate | BinaryOp | Call


def free_variables(expr: Expression) -> frozenset[str]:
    """Names of the variables referenced by ``expr``."""
    if isinstance(expr, Variable):
        return frozenset({expr.name})
    if isinstance(expr, Negate):
        return free_variables(expr.operand)
    if isinstance(expr, BinaryOp):
        return free_variables(expr.left) | free_variables(expr.right)
    if isinstance(expr, Call):
        names: frozenset[str] = frozenset()
        for arg in expr.args:
            names |= free_variables(arg)
        return names
    return frozenset()
