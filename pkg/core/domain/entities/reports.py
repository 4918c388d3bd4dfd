"""
Report entities produced by the solver, the probes and the De Giorgi tools.

Each report knows how to render itself as ``key=value`` lines; the etl
loaders only decide where the lines go.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from core.domain.exceptions import InvalidParameterError
from core.domain.value_objects.verdicts import SequenceVerdict


def format_value(value: object) -> str:
    """Deterministic text form used in every report line."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class ProbeReport:
    """
    Named diagnostic record.

    Attributes:
        name: Probe name (e.g. "caccioppoli").
        measured: Measured constants, in insertion order.
        passed: Pass flag; always equal to ``margin >= 0``.
        margin: Signed distance to the pass threshold.
        notes: Free-text flags ("constant", "demonstration", ...).

    Raises:
        InvalidParameterError: If ``passed`` disagrees with ``margin``.
    """

    name: str
    measured: dict[str, float] = field(default_factory=dict)
    passed: bool = True
    margin: float = 0.0
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.passed != (self.margin >= 0):
            raise InvalidParameterError(f"report {self.name!r}: pass flag must equal margin >= 0")

    @classmethod
    def from_margin(
        cls,
        name: str,
        measured: dict[str, float],
        margin: float,
        notes: tuple[str, ...] = (),
    ) -> ProbeReport:
        margin = float(margin)
        return cls(name=name, measured=dict(measured), passed=margin >= 0, margin=margin, notes=notes)

    def to_lines(self) -> list[str]:
        lines = [f"probe={self.name}", f"pass={format_value(self.passed)}", f"margin={format_value(self.margin)}"]
        lines += [f"{key}={format_value(value)}" for key, value in self.measured.items()]
        if self.notes:
            lines.append(f"notes={';'.join(self.notes)}")
        return lines


@dataclass(frozen=True)
class ConvergenceReport:
    """
    Outcome of a variational solve.

    Attributes:
        converged: True when the gradient-norm stopping rule was met.
        iterations: Accepted iterations over all continuation stages.
        energy: Final discrete energy J_h of the unsmoothed Lagrangian.
        residual: Final max-norm of ∂J_h/∂u over interior nodes.
        threshold: Stopping threshold tol_residual * h^n.
        smoothing_schedule: eps values used, in order (empty when none).
        method: Descent method name.
        wall_time: Seconds spent in the solve.
        lagrangian: Label of the Lagrangian.
        energy_history: Objective value after every accepted iteration,
            per continuation stage (not rendered).
    """

    converged: bool
    iterations: int
    energy: float
    residual: float
    threshold: float
    smoothing_schedule: tuple[float, ...] = ()
    method: str = "newton-damped"
    wall_time: float = 0.0
    lagrangian: str = ""
    energy_history: tuple[float, ...] = field(default=(), repr=False)

    def to_lines(self) -> list[str]:
        schedule = format_value(self.smoothing_schedule) if self.smoothing_schedule else "none"
        return [
            f"lagrangian={self.lagrangian}",
            f"method={self.method}",
            f"converged={format_value(self.converged)}",
            f"iterations={self.iterations}",
            f"energy={format_value(self.energy)}",
            f"residual={format_value(self.residual)}",
            f"threshold={format_value(self.threshold)}",
            f"smoothing_schedule={schedule}",
            f"wall_time={self.wall_time:.3f}",
        ]


@dataclass(frozen=True)
class HolderFit:
    """
    Log-log fit of a dyadic scaling sequence.

    For ``quantity="oscillation"`` the values are osc_{B_r} v and the
    exponent is α. For ``quantity="energy"`` they are ∫_{B_r}|∇v|² and the
    exponent is 2α.

    Attributes:
        quantity: "oscillation" or "energy".
        radii: Radii kept in the fit, descending.
        values: Measured quantity per kept radius.
        exponent: Least-squares slope of log value against log r (NaN when constant).
        residual: RMS residual of the fit in log space.
        decay_factors: values[i + 1] / values[i] for consecutive radii.
        constant: True when every value is below 1e-12.
        dropped: Radii dropped for lack of resolution.
    """

    quantity: str
    radii: tuple[float, ...]
    values: tuple[float, ...]
    exponent: float
    residual: float
    decay_factors: tuple[float, ...] = ()
    constant: bool = False
    dropped: tuple[float, ...] = ()

    @property
    def alpha(self) -> float:
        return self.exponent / 2.0 if self.quantity == "energy" else self.exponent

    def to_lines(self) -> list[str]:
        lines = [
            f"quantity={self.quantity}",
            f"alpha={format_value(self.alpha)}",
            f"exponent={format_value(self.exponent)}",
            f"fit_residual={format_value(self.residual)}",
            f"radii={format_value(self.radii)}",
            f"values={format_value(self.values)}",
        ]
        if self.decay_factors:
            lines.append(f"decay_factors={format_value(self.decay_factors)}")
        if self.dropped:
            lines.append(f"dropped={format_value(self.dropped)}")
        if self.constant:
            lines.append("notes=constant")
        return lines


@dataclass(frozen=True)
class IterationTrace:
    """
    A De Giorgi sequence iteration.

    Attributes:
        sequence: a_0, a_1, ... (finite, non-negative).
        parameters: Rule parameters, e.g. {"C": 2, "delta": 1}.
        verdict: Outcome of the iteration.
        threshold: Bisected threshold a0* when computed.
        bound_ratio_max: max_k a_k (1 + ck) for the quadratic lemma.
    """

    sequence: tuple[float, ...]
    parameters: dict[str, float]
    verdict: SequenceVerdict
    threshold: float | None = None
    bound_ratio_max: float | None = None

    def __post_init__(self) -> None:
        if any(a < 0 or math.isnan(a) for a in self.sequence):
            raise InvalidParameterError("sequence terms must be non-negative")

    def to_lines(self) -> list[str]:
        lines = [f"{key}={format_value(float(value))}" for key, value in self.parameters.items()]
        lines += [f"verdict={self.verdict}", f"steps={len(self.sequence)}"]
        if self.sequence:
            lines.append(f"last={format_value(self.sequence[-1])}")
        if self.threshold is not None:
            lines.append(f"threshold={format_value(self.threshold)}")
        if self.bound_ratio_max is not None:
            lines.append(f"bound_ratio_max={format_value(self.bound_ratio_max)}")
        return lines


@dataclass(frozen=True)
class LevelProfile:
    """
    Sampled level quantity of a field: V(s) or W(s).

    Attributes:
        kind: "V" (truncated L² mass on B_{2-s}) or "W" (sublevel measure in B_1).
        heights: Sample heights s, ascending.
        values: Profile values at the heights.
        implied_constant: Largest admissible measure-gain constant (W only).

    Raises:
        InvalidParameterError: If the monotonicity or range invariant fails.
    """

    kind: str
    heights: tuple[float, ...]
    values: tuple[float, ...]
    implied_constant: float | None = None

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if self.kind not in ("V", "W"):
            raise InvalidParameterError("profile kind must be 'V' or 'W'")
        if len(self.heights) != len(self.values):
            raise InvalidParameterError("heights and values must have equal length")
        if any(b < a for a, b in zip(self.heights, self.heights[1:])):
            raise InvalidParameterError("heights must be ascending")
        pairs = list(zip(self.values, self.values[1:]))
        if self.kind == "W":
            if any(not 0.0 <= w <= 1.0 for w in self.values):
                raise InvalidParameterError("W values must lie in [0, 1]")
            if any(b < a for a, b in pairs):
                raise InvalidParameterError("W must be non-decreasing")
        elif any(b > a for a, b in pairs):
            raise InvalidParameterError("V must be non-increasing")
