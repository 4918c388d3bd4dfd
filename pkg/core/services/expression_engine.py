"""
Arithmetic expression engine.

Parses boundary data and user-defined Lagrangians into an immutable syntax
tree and evaluates it with numpy, so a single parse can be evaluated at one
point or at every boundary node at once.

Grammar (whitespace insignificant, '^' right-associative, unary minus
binding looser than '^')::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := number | constant | variable | call | '(' expr ')'
    call    := name '(' expr (',' expr)* ')'

NO dependencies on the field or solver layers.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.domain.entities.expression import (
    CONSTANTS,
    FUNCTION_ARITY,
    SPATIAL_VARIABLES,
    BinaryOp,
    Call,
    Constant,
    Expression,
    Negate,
    Number,
    Variable,
    free_variables,
)
from core.domain.exceptions import EvaluationError, ParseError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

LAGRANGIAN_VARIABLES: tuple[str, ...] = ("p1", "p2", "p3", "p4")

PRIMARY_START: frozenset[str] = frozenset({"number", "identifier", "'('", "'-'"})

_NUMBER_RE = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_SYMBOLS = {"+": "+", "-": "-", "−": "-", "*": "*", "/": "/", "^": "^", "(": "(", ")": ")", ",": ","}


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    """A lexical token.

    Attributes:
        kind: "number", "identifier", a symbol ("+", "(", ...) or "end".
        text: Source text of the token.
        offset: Byte offset of the token in the UTF-8 encoded source.
    """

    kind: str
    text: str
    offset: int


def tokenize(src: str) -> list[Token]:
    """Split ``src`` into tokens, ending with an "end" token.

    Raises:
        ParseError: On a character that starts no token.
    """
    tokens: list[Token] = []
    i = 0
    while i < len(src):
        ch = src[i]
        offset = len(src[:i].encode("utf-8"))
        if ch.isspace():
            i += 1
            continue
        number = _NUMBER_RE.match(src, i)
        if number:
            tokens.append(Token("number", number.group(0), offset))
            i = number.end()
            continue
        name = _NAME_RE.match(src, i)
        if name:
            tokens.append(Token("identifier", name.group(0), offset))
            i = name.end()
            continue
        if ch in _SYMBOLS:
            tokens.append(Token(_SYMBOLS[ch], ch, offset))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", offset, PRIMARY_START)
    tokens.append(Token("end", "", len(src.encode("utf-8"))))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, src: str, variables: Sequence[str]) -> None:
        self.tokens = tokenize(src)
        self.pos = 0
        self.variables = frozenset(variables)

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str) -> Token:
        if self.current.kind != kind:
            raise ParseError(f"expected {kind!r}, found {self.current.text or 'end of input'!r}",
                             self.current.offset, frozenset({f"'{kind}'"}))
        return self.advance()

    def parse(self) -> Expression:
        expr = self.expr()
        if self.current.kind != "end":
            raise ParseError(f"unexpected {self.current.text!r}", self.current.offset,
                             frozenset({"operator", "end of input"}))
        return expr

    def expr(self) -> Expression:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.current.kind == "-":
            self.advance()
            return Negate(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.primary()
        if self.current.kind == "^":
            self.advance()
            return BinaryOp("^", base, self.unary())
        return base

    def primary(self) -> Expression:
        token = self.current
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if not np.isfinite(value):
                raise ParseError(f"number {token.text!r} out of range", token.offset, frozenset({"number"}))
            return Number(value)
        if token.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if token.kind == "identifier":
            self.advance()
            if self.current.kind == "(":
                return self.call(token)
            if token.text in CONSTANTS:
                return Constant(token.text)
            if token.text in self.variables:
                return Variable(token.text)
            raise ParseError(f"unknown identifier {token.text!r}", token.offset,
                             frozenset(sorted(self.variables | CONSTANTS)))
        found = token.text or "end of input"
        raise ParseError(f"unexpected {found!r}", token.offset, PRIMARY_START)

    def call(self, name: Token) -> Expression:
        arity = FUNCTION_ARITY.get(name.text)
        if arity is None:
            raise ParseError(f"unknown function {name.text!r}", name.offset, frozenset(FUNCTION_ARITY))
        self.expect("(")
        args = [self.expr()]
        while self.current.kind == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != arity:
            raise ParseError(f"{name.text} takes {arity} argument(s), got {len(args)}", name.offset,
                             frozenset({f"{arity} argument(s)"}))
        return Call(name.text, tuple(args))


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------

def _fault(mask: NDArray[np.bool_] | np.bool_, message: str) -> None:
    bad = np.asarray(mask)
    if np.any(bad):
        index = int(np.flatnonzero(bad.ravel())[0]) if bad.ndim else None
        raise EvaluationError(message, index)


def _power(base: NDArray[np.float64], exponent: NDArray[np.float64]) -> NDArray[np.float64]:
    base, exponent = np.broadcast_arrays(base, exponent)
    _fault((base < 0) & (exponent != np.round(exponent)), "negative base with non-integer exponent")
    _fault((base == 0) & (exponent < 0), "division by zero (zero base, negative exponent)")
    return np.power(base, exponent)


def _divide(num: NDArray[np.float64], den: NDArray[np.float64]) -> NDArray[np.float64]:
    num, den = np.broadcast_arrays(num, den)
    _fault(den == 0, "division by zero")
    return num / den


def _log(arg: NDArray[np.float64]) -> NDArray[np.float64]:
    _fault(arg <= 0, "log of a non-positive number")
    return np.log(arg)


def _sqrt(arg: NDArray[np.float64]) -> NDArray[np.float64]:
    _fault(arg < 0, "sqrt of a negative number")
    return np.sqrt(arg)


_FUNCTIONS: dict[str, Callable[..., NDArray[np.float64]]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
    "atan2": np.arctan2,
}

_BINARY: dict[str, Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": _divide,
    "^": _power,
}


def _eval(node: Expression, env: Mapping[str, NDArray[np.float64]]) -> NDArray[np.float64]:
    if isinstance(node, Number):
        return np.asarray(node.value)
    if isinstance(node, Constant):
        return np.asarray(np.pi)
    if isinstance(node, Variable):
        if node.name not in env:
            raise EvaluationError(f"variable {node.name!r} not supplied")
        return env[node.name]
    if isinstance(node, Negate):
        return -_eval(node.operand, env)
    if isinstance(node, BinaryOp):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        result = _BINARY[node.op](left, right)
    else:
        args = [_eval(arg, env) for arg in node.args]
        result = _FUNCTIONS[node.function](*args)
    _fault(~np.isfinite(result), "overflow or undefined result")
    return result


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class ExpressionEngine:
    """Parse, print and evaluate expressions."""

    @staticmethod
    def parse(src: str, variables: Sequence[str] = SPATIAL_VARIABLES) -> Expression:
        """Parse ``src`` into a syntax tree.

        Args:
            src: Expression text.
            variables: Admissible variable names (x, y, z, w by default).

        Raises:
            ParseError: With the byte offset and the expected-token set.
        """
        return _Parser(src, variables).parse()

    @staticmethod
    def to_source(expr: Expression) -> str:
        """Canonical fully parenthesised text; parsing it returns an equal tree."""
        return expr.to_source()

    @staticmethod
    def evaluate(expr: Expression, point: Mapping[str, ArrayLike]) -> float | NDArray[np.float64]:
        """Evaluate ``expr`` with IEEE doubles.

        Scalar inputs give a float; array inputs broadcast and give an array.

        Raises:
            EvaluationError: On any domain fault or a missing variable.
        """
        env = {name: np.asarray(value, dtype=float) for name, value in point.items()}
        with np.errstate(all="ignore"):
            result = _eval(expr, env)
        if result.ndim == 0:
            return float(result)
        return result

    @staticmethod
    def compile(expr: Expression, variables: Sequence[str]) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
        """Return f(points) evaluating ``expr`` on an array of shape (..., len(variables)).

        Variable k of ``variables`` is bound to ``points[..., k]``.
        """
        names = tuple(variables)
        unused = free_variables(expr) - set(names)
        if unused:
            raise EvaluationError(f"expression uses unbound variables {sorted(unused)}")

        def evaluate(points: NDArray[np.float64]) -> NDArray[np.float64]:
            pts = np.asarray(points, dtype=float)
            env = {name: pts[..., k] for k, name in enumerate(names)}
            with np.errstate(all="ignore"):
                result = _eval(expr, env)
            return np.broadcast_to(result, pts.shape[:-1]).astype(float)

        return evaluate
