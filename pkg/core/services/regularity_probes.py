"""
Regularity probes.

Quantitative diagnostics on discrete fields: oscillation decay and Hölder
fits, Caccioppoli and Courant-Lebesgue audits, maximum principles, the
L2-Linfinity estimate, Harnack ratios, energy decay, gradient clouds and
their chopping by lines and circles.

All inequality audits allow a relative discretization slack (10% unless
the caller overrides it).

NO dependencies on config, etl or infrastructure.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.domain.entities.gradient_cloud import GradientCloud
from core.domain.entities.grid import ScalarField
from core.domain.entities.lagrangian import EllipticityWindow, Lagrangian
from core.domain.entities.reports import HolderFit, ProbeReport
from core.domain.exceptions import (
    EmptyCloudError,
    InsufficientResolutionError,
    InvalidParameterError,
    NotApplicableError,
    OutOfDomainError,
)
from core.domain.value_objects.verdicts import ChopVerdict, CircleVerdict
from core.services.field_calculus import FieldCalculus, axis_derivative
from core.services.finite_differences import central_hessian
from core.services.lagrangian_catalog import SeparableCompanion
from core.services.variational_solver import CoefficientField

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
Ball = tuple[ArrayLike, float]


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DEFAULT_SLACK: float = 0.1
MIN_FIT_NODES: int = 25
CONSTANT_TOL: float = 1e-12
ETA_FD_TOL: float = 1e-6
DEFAULT_L2LINF_CAP: float = 10.0


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _center(field: ScalarField, center: ArrayLike | None) -> FloatArray:
    return np.zeros(field.grid.dim) if center is None else np.asarray(center, dtype=float)


def _require_ball(field: ScalarField, center: FloatArray, r: float) -> NDArray[np.bool_]:
    if not field.grid.ball_inside_domain(center, r):
        raise OutOfDomainError(f"ball of radius {r} at {tuple(center)} leaves the domain")
    return field.grid.ball_nodes(center, r)


def _fit(quantity: str, radii: Sequence[float], values: Sequence[float], dropped: tuple[float, ...]) -> HolderFit:
    if len(radii) < 2:
        raise InsufficientResolutionError(f"need two resolvable radii for a {quantity} fit, got {len(radii)}")
    vals = np.asarray(values, dtype=float)
    if np.all(vals < CONSTANT_TOL):
        return HolderFit(quantity, tuple(radii), tuple(float(v) for v in vals), math.nan, 0.0,
                         constant=True, dropped=dropped)
    if np.any(vals <= 0):
        raise InsufficientResolutionError(f"{quantity} vanishes at some radii but not all; no power law fits")
    x, y = np.log(np.asarray(radii)), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    factors = tuple(float(b / a) for a, b in zip(vals, vals[1:]))
    return HolderFit(quantity, tuple(radii), tuple(float(v) for v in vals), float(slope), residual,
                     decay_factors=factors, dropped=dropped)


def _band(field: ScalarField, center: FloatArray, r: float) -> NDArray[np.bool_]:
    grid = field.grid
    dist = np.linalg.norm(grid.coordinates - center, axis=-1)
    return (dist > r - grid.h) & (dist <= r + grid.h) & grid.active


def _node_hessian(field: ScalarField) -> FloatArray:
    grid = field.grid
    grad = FieldCalculus.gradient(field).values
    hess = np.empty((*grid.shape, grid.dim, grid.dim))
    for a in range(grid.dim):
        for b in range(grid.dim):
            hess[..., a, b] = axis_derivative(grad[..., a], grid.active, b, grid.h)
    return 0.5 * (hess + np.swapaxes(hess, -1, -2))


def _eta(M: float):
    def value(p: FloatArray) -> FloatArray:
        return np.linalg.norm(p, axis=-1) ** (-M) - 1.0

    return value


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class RegularityProbes:
    """Diagnostics on solved and sampled fields."""

    # -- oscillation ------------------------------------------------------

    @staticmethod
    def oscillation(v: ScalarField, center: ArrayLike | None, r: float) -> float:
        """max - min of v over the nodes of the closed ball B_r(center).

        Raises:
            OutOfDomainError: If the ball leaves the domain.
            InsufficientResolutionError: If fewer than 2 nodes fall inside.
        """
        c = _center(v, center)
        inside = _require_ball(v, c, r)
        if np.count_nonzero(inside) < 2:
            raise InsufficientResolutionError(f"ball of radius {r} holds fewer than 2 nodes")
        values = v.values[inside]
        return float(values.max() - values.min())

    @staticmethod
    def holder_fit(v: ScalarField, center: ArrayLike | None, radii: Sequence[float]) -> HolderFit:
        """Slope of log osc against log r over resolvable radii.

        Radii whose ball holds fewer than 25 nodes are dropped with a warning.
        """
        c = _center(v, center)
        kept: list[float] = []
        oscillations: list[float] = []
        dropped: list[float] = []
        for r in sorted(radii, reverse=True):
            if np.count_nonzero(_require_ball(v, c, r)) < MIN_FIT_NODES:
                logger.warning("radius %g dropped from the Hölder fit: fewer than %d nodes", r, MIN_FIT_NODES)
                dropped.append(r)
                continue
            kept.append(r)
            oscillations.append(RegularityProbes.oscillation(v, c, r))
        return _fit("oscillation", kept, oscillations, tuple(dropped))

    @staticmethod
    def energy_decay(v: ScalarField, center: ArrayLike | None = None, kmax: int = 6) -> HolderFit:
        """Dirichlet energies ∫_{B_{2^-k}} |∇v|², k = 0..kmax, and their log-log slope (2α)."""
        c = _center(v, center)
        sq = FieldCalculus.gradient(v).norm() ** 2
        grid = v.grid
        kept: list[float] = []
        energies: list[float] = []
        dropped: list[float] = []
        for k in range(kmax + 1):
            r = grid.half_width * 2.0**-k
            inside = _require_ball(v, c, r)
            if np.count_nonzero(inside) < MIN_FIT_NODES:
                logger.warning("energy decay truncated at k=%d (radius %g)", k, r)
                dropped.append(r)
                continue
            kept.append(r)
            energies.append(FieldCalculus.ball_sum(grid, sq, c, r))
        return _fit("energy", kept, energies, tuple(dropped))

    # -- energy inequalities ---------------------------------------------

    @staticmethod
    def caccioppoli_audit(
        coefficients: CoefficientField | EllipticityWindow,
        v: ScalarField,
        r_in: float,
        r_out: float,
        center: ArrayLike | None = None,
        slack: float = DEFAULT_SLACK,
        demonstration: bool = False,
    ) -> ProbeReport:
        """∫|∇v|²ψ² <= 4 λ^-4 ∫ v²|∇ψ|² (1 + slack) with ψ the linear cutoff.

        λ is the scale-free ellipticity constant of the coefficient window.

        Raises:
            NotApplicableError: If the window is degenerate (λ = 0).
        """
        window = coefficients.window if isinstance(coefficients, CoefficientField) else coefficients
        lam = window.normalized_lambda
        if lam <= 0:
            raise NotApplicableError("Caccioppoli audit needs a non-degenerate coefficient window")
        c = _center(v, center)
        grid = v.grid
        psi = FieldCalculus.cutoff(grid, r_in, r_out, c)
        grad_v = FieldCalculus.gradient(v).norm() ** 2
        grad_psi = FieldCalculus.gradient(psi).norm() ** 2
        lhs = FieldCalculus.ball_sum(grid, grad_v * psi.values**2, c, r_out)
        rhs = 4.0 * lam**-4 * FieldCalculus.ball_sum(grid, v.values**2 * grad_psi, c, r_out)
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
        notes = ("demonstration",) if demonstration else ()
        return ProbeReport.from_margin(
            "caccioppoli",
            {"lhs": lhs, "rhs": rhs, "ratio": ratio, "lambda": lam},
            (1.0 + slack) * rhs - lhs,
            notes=notes,
        )

    @staticmethod
    def courant_lebesgue_check(
        w: ScalarField,
        r: float,
        center: ArrayLike | None = None,
        slack: float = DEFAULT_SLACK,
    ) -> ProbeReport:
        """(osc over the discrete circle ∂B_r)² <= π/log(1/(2r)) ∫_{B_1/2} |∇w|².

        The circle is the node band r - h < |x - c| <= r + h.

        Raises:
            InvalidParameterError: Unless dim = 2 and 0 < r <= 1/4.
            NotApplicableError: If w fails the maximum principle on annuli.
        """
        grid = w.grid
        if grid.dim != 2:
            raise InvalidParameterError("the Courant-Lebesgue check is two-dimensional")
        if not 0 < r <= 0.25:
            raise InvalidParameterError(f"radius must lie in (0, 1/4], got {r}")
        c = _center(w, center)
        radii = []
        rho = 0.5
        while rho >= r:
            radii.append(rho)
            rho /= 2.0
        precheck = RegularityProbes.max_principle_check(w, [(c, rho) for rho in radii], two_sided=True)
        if not precheck.passed:
            raise NotApplicableError("field violates the discrete maximum principle on annuli")
        band = _band(w, c, r)
        if np.count_nonzero(band) < 2:
            raise InsufficientResolutionError(f"circle of radius {r} is not resolved")
        osc = float(w.values[band].max() - w.values[band].min())
        lhs = osc**2
        energy = FieldCalculus.ball_sum(grid, FieldCalculus.gradient(w).norm() ** 2, c, 0.5)
        rhs = math.pi / math.log(1.0 / (2.0 * r)) * energy
        return ProbeReport.from_margin(
            "courant-lebesgue",
            {"r": r, "lhs": lhs, "rhs": rhs, "energy": energy},
            (1.0 + slack) * rhs - lhs,
        )

    # -- maximum principles ----------------------------------------------

    @staticmethod
    def max_principle_check(v: ScalarField, balls: Sequence[Ball], two_sided: bool = False) -> ProbeReport:
        """Interior max <= ring max + 2h·Lip on every ball (and the min analogue when two-sided).

        The interior of B_r is |x - c| < r - h, the ring the node band
        around |x - c| = r, and Lip the largest node-gradient norm on the ball.
        """
        grid = v.grid
        norms = FieldCalculus.gradient(v).norm()
        worst = -math.inf
        for center, r in balls:
            c = np.asarray(center, dtype=float)
            _require_ball(v, c, r)
            ball = grid.ball_nodes(c, r + grid.h)
            dist = np.linalg.norm(grid.coordinates - c, axis=-1)
            interior = (dist < r - grid.h) & grid.active
            ring = _band(v, c, r)
            if not np.any(interior) or not np.any(ring):
                logger.warning("ball of radius %g at %s is not resolved; skipped", r, tuple(c))
                continue
            lip = float(norms[ball].max())
            allowance = 2.0 * grid.h * lip
            violation = float(v.values[interior].max() - v.values[ring].max()) - allowance
            if two_sided:
                violation = max(violation, float(v.values[ring].min() - v.values[interior].min()) - allowance)
            worst = max(worst, violation)
        if worst == -math.inf:
            raise InsufficientResolutionError("no ball was resolved by the grid")
        return ProbeReport.from_margin(
            "max-principle", {"worst_violation": worst, "balls": float(len(balls))}, -worst
        )

    @staticmethod
    def directional_max_principle_check(u: ScalarField, e: ArrayLike, balls: Sequence[Ball]) -> ProbeReport:
        """Two-sided maximum principle for the discrete directional derivative u_e."""
        direction = np.asarray(e, dtype=float)
        norm = float(np.linalg.norm(direction))
        if norm == 0:
            raise InvalidParameterError("direction must be non-zero")
        u_e = ScalarField(u.grid, np.nan_to_num(FieldCalculus.gradient(u).dot(direction / norm), nan=0.0))
        report = RegularityProbes.max_principle_check(u_e, balls, two_sided=True)
        return ProbeReport.from_margin(
            "directional-max-principle", report.measured, report.margin,
            notes=(f"e={','.join(f'{x:g}' for x in direction / norm)}",),
        )

    @staticmethod
    def l2_linf_check(v: ScalarField, cap: float = DEFAULT_L2LINF_CAP) -> ProbeReport:
        """Ratio sup_{B_1} v / ||v+||_{L²(B_2)} against a configured cap.

        Raises:
            InvalidParameterError: If the grid does not cover the ball of radius 2.
        """
        grid = v.grid
        origin = np.zeros(grid.dim)
        if not grid.ball_inside_domain(origin, 2.0):
            raise InvalidParameterError("the L2-Linfinity check needs a grid covering B_2 (half_width >= 2)")
        sup = float(v.values[grid.ball_nodes(origin, 1.0)].max())
        mass = math.sqrt(FieldCalculus.ball_sum(grid, np.maximum(v.values, 0.0) ** 2, origin, 2.0))
        if sup <= 0:
            ratio = 0.0
        elif mass == 0:
            ratio = math.inf
        else:
            ratio = sup / mass
        return ProbeReport.from_margin(
            "l2-linf", {"sup_b1": sup, "l2_b2": mass, "ratio": ratio, "cap": cap}, cap - ratio
        )

    @staticmethod
    def harnack_ratio(v: ScalarField, center: ArrayLike | None = None, r: float = 0.25) -> float:
        """sup_{B_r} v / inf_{B_r} v for v positive on B_1.

        Raises:
            NotApplicableError: If v has a non-positive node in B_1.
        """
        c = _center(v, center)
        if np.any(v.values[_require_ball(v, c, 1.0)] <= 0):
            raise NotApplicableError("Harnack ratio needs a positive function on B_1")
        values = v.values[_require_ball(v, c, r)]
        return float(values.max() / values.min())

    @staticmethod
    def hessian_determinant_audit(
        w: ScalarField,
        window: EllipticityWindow,
        center: ArrayLike | None = None,
        r: float = 0.5,
        slack: float = DEFAULT_SLACK,
    ) -> ProbeReport:
        """Worst |D²w|² / (-det D²w) against C(λ) = λ² + λ^-2 (two dimensions).

        Solutions of tr(a D²w) = 0 with a in [λ, 1/λ] have Hessian eigenvalue
        ratios in [λ², λ^-2]; nodes with a negligible Hessian are skipped.
        """
        if w.grid.dim != 2:
            raise InvalidParameterError("the Hessian determinant audit is two-dimensional")
        lam = window.normalized_lambda
        if lam <= 0:
            raise NotApplicableError("determinant audit needs a non-degenerate window")
        c = _center(w, center)
        inside = _require_ball(w, c, r) & w.grid.interior
        hess = _node_hessian(w)[inside]
        size = np.sum(hess**2, axis=(-1, -2))
        keep = size > CONSTANT_TOL * max(1.0, float(size.max(initial=0.0)))
        det = np.linalg.det(hess[keep])
        bound = lam**2 + lam**-2
        if not np.any(keep):
            return ProbeReport.from_margin("hessian-determinant", {"worst_ratio": 0.0, "bound": bound}, bound,
                                           notes=("flat",))
        with np.errstate(divide="ignore"):
            ratios = np.where(det < 0, size[keep] / np.where(det < 0, -det, 1.0), np.inf)
        worst = float(ratios.max())
        return ProbeReport.from_margin(
            "hessian-determinant", {"worst_ratio": worst, "bound": bound}, (1.0 + slack) * bound - worst
        )

    # -- gradient clouds -------------------------------------------------

    @staticmethod
    def gradient_cloud(u: ScalarField, center: ArrayLike | None, r: float) -> GradientCloud:
        """Node gradients of u at the interior nodes of B_r(center)."""
        c = _center(u, center)
        inside = _require_ball(u, c, r) & u.grid.interior
        if not np.any(inside):
            raise InsufficientResolutionError(f"ball of radius {r} holds no interior node")
        points = FieldCalculus.gradient(u).values[inside]
        return GradientCloud(points, tuple(float(x) for x in c), r)

    @staticmethod
    def chop_halfplane(cloud: GradientCloud, e: ArrayLike, a: float, gap: float) -> ChopVerdict:
        """Classify the cloud against the strip a <= p·e <= a + gap.

        BELOW is tested first, so a cloud inside the strip is BELOW.
        """
        if len(cloud) == 0:
            raise EmptyCloudError("cannot chop an empty gradient cloud")
        direction = np.asarray(e, dtype=float)
        if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-12:
            raise InvalidParameterError("chopping direction must be a unit vector")
        if not gap > 0:
            raise InvalidParameterError("strip gap must be positive")
        heights = cloud.points @ direction
        if np.all(heights <= a + gap):
            return ChopVerdict.BELOW
        if np.all(heights >= a):
            return ChopVerdict.ABOVE
        return ChopVerdict.CROSSES

    @staticmethod
    def chop_circle(cloud: GradientCloud, q: ArrayLike, r_in: float, r_out: float) -> CircleVerdict:
        """Classify the cloud against the annulus r_in <= |p - q| <= r_out.

        INSIDE is tested first (every point within r_out), then OUTSIDE
        (every point at least r_in away).
        """
        if len(cloud) == 0:
            raise EmptyCloudError("cannot chop an empty gradient cloud")
        if not 0 < r_in < r_out:
            raise InvalidParameterError("annulus needs 0 < r_in < r_out")
        dist = np.linalg.norm(cloud.points - np.asarray(q, dtype=float), axis=-1)
        if np.all(dist <= r_out):
            return CircleVerdict.INSIDE
        if np.all(dist >= r_in):
            return CircleVerdict.OUTSIDE
        return CircleVerdict.CROSSES

    # -- pointwise audits ------------------------------------------------

    @staticmethod
    def eta_hessian_eigenvalues(M: float, p: ArrayLike) -> tuple[float, float]:
        """(radial, tangential) eigenvalues of D²(|p|^-M - 1) by central differences."""
        point = np.asarray(p, dtype=float)
        rho = float(np.linalg.norm(point))
        if rho == 0:
            raise InvalidParameterError("η is singular at the origin")
        hess = central_hessian(_eta(M), point, 1e-4 * rho)
        radial_dir = point / rho
        radial = float(radial_dir @ hess @ radial_dir)
        eig = np.linalg.eigvalsh(hess)
        return radial, float(eig[0])

    @staticmethod
    def eta_subsolution_audit(M: float, rho0: float, n: int, samples: int = 16) -> ProbeReport:
        """Check the circle-chop barrier η(p) = [|p|^-M - 1]+ on rho0 <= |p| < 1.

        Compares the differenced Hessian eigenvalues with M(M+1)|p|^(-M-2)
        (radial) and -M|p|^(-M-2) (tangential), and reports the
        subharmonicity criterion M(M+1) >= (n-1)M.
        """
        if not M > 0:
            raise InvalidParameterError("M must be positive")
        if not 0 < rho0 < 1:
            raise InvalidParameterError("rho0 must lie in (0, 1)")
        if n < 2:
            raise InvalidParameterError("dimension must be >= 2")
        worst = 0.0
        for rho in np.linspace(rho0, 1.0, samples, endpoint=False):
            p = np.zeros(n)
            p[0] = rho
            radial, tangential = RegularityProbes.eta_hessian_eigenvalues(M, p)
            radial_exact = M * (M + 1) * rho ** (-M - 2)
            tangential_exact = -M * rho ** (-M - 2)
            worst = max(worst, abs(radial / radial_exact - 1.0), abs(tangential / tangential_exact - 1.0))
        criterion = M * (M + 1) - (n - 1) * M
        margin = min(ETA_FD_TOL - worst, criterion)
        return ProbeReport.from_margin(
            "eta-subsolution",
            {"M": M, "rho0": rho0, "n": float(n), "max_relative_error": worst, "criterion": criterion},
            margin,
        )

    @staticmethod
    def separable_residual(F: Lagrangian, companion: SeparableCompanion, point: ArrayLike) -> float:
        """F_11(∇u) u_11 + F_22(∇u) u_22 for the explicit separable solution."""
        grad = companion.gradient(point)
        return float(np.trace(F.hessian(grad) @ companion.hessian(point)))
