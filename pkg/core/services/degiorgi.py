"""
De Giorgi iteration tools.

Truncations, the truncated-mass profile V(s) and its scaling-class
constant, sublevel measure profiles W(s), the oscillation drop, and the
two numeric sequence lemmas iterated on their extremal recurrences.

NO dependencies on config, etl or infrastructure.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from core.domain.entities.grid import ScalarField
from core.domain.entities.reports import IterationTrace, LevelProfile, ProbeReport
from core.domain.exceptions import (
    InsufficientResolutionError,
    InvalidParameterError,
    NotApplicableError,
    OutOfDomainError,
)
from core.domain.value_objects.verdicts import SequenceVerdict

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

UNDERFLOW_LEVEL: float = 1e-300
LOG_UNDERFLOW: float = math.log(UNDERFLOW_LEVEL)
LOG_OVERFLOW: float = math.log(np.finfo(float).max)
BOUND_TOL: float = 1e-12
DROP_MARGIN: float = 1e-3
THRESHOLD_KMAX: int = 1000
BISECTION_TOL: float = 1e-6

CONVEX_MAPS: dict[str, Callable[[FloatArray], FloatArray]] = {
    "square-plus": lambda t: np.maximum(t, 0.0) ** 2,
    "exp": np.exp,
}


# ---------------------------------------------------------------------------
# Data transfer objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdSweep:
    """
    Bisected thresholds a0* over a (C, delta) parameter grid.

    Attributes:
        cs: C values (rows).
        deltas: delta values (columns).
        thresholds: Matrix of a0*, shape (len(cs), len(deltas)).
    """

    cs: tuple[float, ...]
    deltas: tuple[float, ...]
    thresholds: FloatArray = field(repr=False)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _unit_ball(v: ScalarField, radius: float) -> NDArray[np.bool_]:
    origin = np.zeros(v.grid.dim)
    if not v.grid.ball_inside_domain(origin, radius):
        raise OutOfDomainError(f"ball of radius {radius} leaves the domain")
    inside = v.grid.ball_nodes(origin, radius)
    if not np.any(inside):
        raise InsufficientResolutionError(f"ball of radius {radius} holds no node")
    return inside


def _geometric_run(C: float, delta: float, a0: float, kmax: int) -> tuple[list[float], SequenceVerdict]:
    """Iterate a_{k+1} = C^k a_k^(1+delta) in log space until a certificate decides."""
    if a0 == 0:
        return [0.0] * (kmax + 1), SequenceVerdict.CONVERGES
    log_c = math.log(C)
    ell = math.log(a0)
    sequence = [a0]
    for k in range(kmax + 1):
        if ell < LOG_UNDERFLOW:
            return sequence, SequenceVerdict.CONVERGES
        if log_c > 0 and ell + (k / delta) * log_c <= -log_c / delta**2:
            return sequence, SequenceVerdict.CONVERGES
        if log_c <= 0 and ell < 0:
            return sequence, SequenceVerdict.CONVERGES
        if log_c >= 0 and ell >= 0:
            return sequence, SequenceVerdict.DIVERGES
        if k == kmax:
            break
        ell = k * log_c + (1.0 + delta) * ell
        if ell > LOG_OVERFLOW:
            return sequence, SequenceVerdict.DIVERGES
        sequence.append(math.exp(ell))
    logger.debug("no certificate within %d steps for C=%g delta=%g a0=%g", kmax, C, delta, a0)
    return sequence, SequenceVerdict.DIVERGES


def _converges(C: float, delta: float, log_a0: float) -> bool:
    _, verdict = _geometric_run(C, delta, math.exp(log_a0), THRESHOLD_KMAX)
    return verdict is SequenceVerdict.CONVERGES


def _bisect_threshold(C: float, delta: float) -> float:
    """sup{a0 : the extremal recurrence tends to 0}, bisected in log a0."""
    log_c = math.log(C)
    lo = -abs(log_c) / delta**2 - 1.0
    while not _converges(C, delta, lo):
        lo *= 2.0
    hi = 1.0
    for _ in range(60):
        if not _converges(C, delta, hi):
            break
        hi *= 2.0
    else:
        raise InvalidParameterError(f"no divergent start found for C={C}, delta={delta}")
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _converges(C, delta, mid):
            lo = mid
        else:
            hi = mid
    return math.exp(lo)


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class DeGiorgi:
    """Truncations, level profiles and sequence lemmas."""

    @staticmethod
    def truncate_plus(v: ScalarField, kappa: float) -> ScalarField:
        return v.with_values(np.maximum(v.values - kappa, 0.0))

    @staticmethod
    def convex_image(v: ScalarField, G: str | Callable[[FloatArray], FloatArray]) -> ScalarField:
        """G(v) for an increasing convex G (a subsolution when v solves the equation)."""
        if isinstance(G, str):
            try:
                G = CONVEX_MAPS[G]
            except KeyError:
                raise InvalidParameterError(f"unknown convex map {G!r}; choose from {sorted(CONVEX_MAPS)}") from None
        with np.errstate(invalid="ignore"):
            return v.with_values(G(v.values))

    @staticmethod
    def v_profile(v: ScalarField, heights: Sequence[float]) -> LevelProfile:
        """V(s) = ∫_{B_{2-s}} (v - s)+² on a grid covering B_2.

        Sums run over the full node array with the ball as a weight mask,
        which keeps V non-increasing bit for bit.
        """
        grid = v.grid
        levels = sorted(float(s) for s in heights)
        if any(not 0.0 <= s <= 1.0 for s in levels):
            raise InvalidParameterError("V(s) heights must lie in [0, 1]")
        _unit_ball(v, 2.0)
        dist = grid.radius
        weight = grid.h**grid.dim
        filled = np.nan_to_num(v.values, nan=-np.inf)
        values = []
        for s in levels:
            inside = (dist <= 2.0 - s + 1e-12) & grid.active
            integrand = np.where(inside, np.maximum(filled - s, 0.0) ** 2, 0.0)
            values.append(float(np.sum(integrand)) * weight)
        return LevelProfile("V", tuple(levels), tuple(values))

    @staticmethod
    def scaling_class_constant(heights: Sequence[float], values: Sequence[float], n: int) -> float:
        """Smallest C with V(κ) <= C (κ - τ)^-(2 + 4/n) V(τ)^(1 + 2/n) for all sampled τ < κ.

        Returns inf when some pair has V(τ) = 0 < V(κ).
        """
        worst = 0.0
        for i, (tau, v_tau) in enumerate(zip(heights, values)):
            for kappa, v_kappa in zip(heights[i + 1:], values[i + 1:]):
                if kappa <= tau or v_kappa == 0:
                    continue
                if v_tau == 0:
                    return math.inf
                ratio = v_kappa * (kappa - tau) ** (2.0 + 4.0 / n) / v_tau ** (1.0 + 2.0 / n)
                worst = max(worst, ratio)
        return worst

    @staticmethod
    def scaling_class_audit(profile: LevelProfile, n: int) -> ProbeReport:
        """Report the scaling-class constant of a V profile; passes iff it is finite."""
        if profile.kind != "V":
            raise InvalidParameterError("the scaling-class audit needs a V profile")
        constant = DeGiorgi.scaling_class_constant(profile.heights, profile.values, n)
        margin = -1.0 if math.isinf(constant) else 1.0 / (1.0 + constant)
        return ProbeReport.from_margin("scaling-class", {"C": constant, "n": float(n)}, margin)

    @staticmethod
    def measure_profile(v: ScalarField, heights: Sequence[float]) -> LevelProfile:
        """W(s) = |{v <= s} ∩ B_1| / |B_1| by node counting, with the implied measure-gain constant.

        The constant is the largest c with
        W(s)(1 + c (t - s)²/(1 - s)² W(s)(1 - W(t))²) <= W(t) over sampled s < t.
        """
        levels = sorted(float(s) for s in heights)
        inside = _unit_ball(v, 1.0)
        total = np.count_nonzero(inside)
        ball_values = v.values[inside]
        ws = [np.count_nonzero(ball_values <= s) / total for s in levels]
        bounds = []
        for i, (s, w_s) in enumerate(zip(levels, ws)):
            for t, w_t in zip(levels[i + 1:], ws[i + 1:]):
                if t <= s or s >= 1.0 or w_s == 0 or w_t >= 1.0:
                    continue
                q = ((t - s) ** 2 / (1.0 - s) ** 2) * w_s * (1.0 - w_t) ** 2
                bounds.append((w_t / w_s - 1.0) / q)
        implied = float(min(bounds)) if bounds else None
        return LevelProfile("W", tuple(levels), tuple(float(w) for w in ws), implied_constant=implied)

    @staticmethod
    def oscillation_drop(v: ScalarField, delta_frac: float) -> ProbeReport:
        """ρ = sup_{B_1/2} v / sup_{B_1} v+; passes iff ρ <= 1 - 1e-3.

        Raises:
            NotApplicableError: If {v+ = 0} covers less than delta_frac of B_1
                or sup_{B_1} v+ = 0.
        """
        if not 0 < delta_frac <= 1:
            raise InvalidParameterError("delta_frac must lie in (0, 1]")
        values = v.values[_unit_ball(v, 1.0)]
        zero_fraction = float(np.count_nonzero(values <= 0) / len(values))
        sup = float(np.maximum(values, 0.0).max())
        if sup == 0:
            raise NotApplicableError("sup of v+ over B_1 vanishes")
        if zero_fraction < delta_frac:
            raise NotApplicableError(f"zero set covers {zero_fraction:.3f} of B_1, below {delta_frac}")
        rho = float(v.values[_unit_ball(v, 0.5)].max()) / sup
        return ProbeReport.from_margin(
            "oscillation-drop",
            {"rho": rho, "sup_b1": sup, "zero_fraction": zero_fraction, "delta": delta_frac},
            (1.0 - DROP_MARGIN) - rho,
        )

    @staticmethod
    def seq_lemma_geometric(C: float, delta: float, a0: float, kmax: int = 200, bisect: bool = True) -> IterationTrace:
        """Iterate a_{k+1} = C^k a_k^(1+delta) and bisect the convergence threshold a0*.

        Convergence is certified by underflow below 1e-300 or by the
        invariant log a_k <= -(k/delta + 1/delta²) log C (C > 1); divergence
        by a_k >= 1 with C >= 1, by overflow, or by running out of steps.
        """
        if not (C > 0 and delta > 0):
            raise InvalidParameterError("C and delta must be positive")
        if a0 < 0 or kmax < 1:
            raise InvalidParameterError("need a0 >= 0 and kmax >= 1")
        sequence, verdict = _geometric_run(C, delta, a0, kmax)
        threshold = _bisect_threshold(C, delta) if bisect else None
        return IterationTrace(
            sequence=tuple(sequence),
            parameters={"C": C, "delta": delta, "a0": a0},
            verdict=verdict,
            threshold=threshold,
        )

    @staticmethod
    def seq_lemma_quadratic(c: float, a0: float, kmax: int = 1000) -> IterationTrace:
        """Iterate a_{k+1} = a_k - c a_k² and check a_k <= 1/(1 + ck) for k <= kmax."""
        if not 0 < c <= 0.5:
            raise InvalidParameterError(f"c must lie in (0, 1/2], got {c}")
        if not 0 <= a0 <= 1:
            raise InvalidParameterError(f"a0 must lie in [0, 1], got {a0}")
        if kmax < 1:
            raise InvalidParameterError("kmax must be >= 1")
        sequence = np.empty(kmax + 1)
        sequence[0] = a0
        for k in range(kmax):
            a = sequence[k]
            sequence[k + 1] = a - c * a * a
        ks = np.arange(kmax + 1)
        ratios = sequence * (1.0 + c * ks)
        holds = bool(np.all(ratios <= 1.0 + BOUND_TOL))
        verdict = SequenceVerdict.BOUND_SATISFIED if holds else SequenceVerdict.DIVERGES
        return IterationTrace(
            sequence=tuple(float(a) for a in sequence),
            parameters={"c": c, "a0": a0},
            verdict=verdict,
            bound_ratio_max=float(ratios.max()),
        )

    @staticmethod
    def threshold_sweep(cs: Sequence[float], deltas: Sequence[float]) -> ThresholdSweep:
        matrix = np.empty((len(cs), len(deltas)))
        for i, C in enumerate(cs):
            for j, delta in enumerate(deltas):
                if not (C > 0 and delta > 0):
                    raise InvalidParameterError("C and delta must be positive")
                matrix[i, j] = _bisect_threshold(C, delta)
        return ThresholdSweep(tuple(float(c) for c in cs), tuple(float(d) for d in deltas), matrix)
