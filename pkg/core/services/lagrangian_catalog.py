"""
Catalog of Lagrangians and one-dimensional convex duality tools.

Builds every builtin integrand as a vectorised evaluator bundle, audits
ellipticity and convexity by sampling, and computes one-dimensional
Legendre transforms for separable examples.

NO dependencies on the field, solver or I/O layers.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad
from scipy.optimize import brentq

from core.domain.entities.lagrangian import (
    ConvexProfile,
    DegeneracySet,
    EllipticityWindow,
    GradientRegion,
    Lagrangian,
)
from core.domain.entities.reports import ProbeReport
from core.domain.exceptions import (
    InvalidParameterError,
    InversionFailureError,
    UnknownLagrangianError,
)
from core.services.expression_engine import LAGRANGIAN_VARIABLES, ExpressionEngine
from core.services.finite_differences import central_gradient, central_hessian

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

BUILTIN_NAMES: tuple[str, ...] = (
    "quadratic",
    "minimal-surface",
    "p-laplace",
    "congestion",
    "anisotropic",
    "separable",
)

EXPRESSION_PREFIX: str = "expr:"

CONVEXITY_TOL: float = 1e-8

# Numeric derivative steps for expression Lagrangians.
EXPRESSION_GRADIENT_STEP: float = 1e-5
EXPRESSION_HESSIAN_STEP: float = 1e-4
EXPRESSION_DERIVATIVE_NOISE: float = 1e-6

# Radius below which singular Hessians (exponent < 2) are evaluated.
HESSIAN_FLOOR: float = 1e-8

BRACKET_EXPANSIONS: int = 60
MAX_REJECTION_ROUNDS: int = 1000


# ---------------------------------------------------------------------------
# Convex profiles
# ---------------------------------------------------------------------------

def _logcosh(t: FloatArray) -> FloatArray:
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


CONVEX_PROFILES: dict[str, ConvexProfile] = {
    "half-square": ConvexProfile(
        label="half-square",
        value=lambda t: 0.5 * np.asarray(t, dtype=float) ** 2,
        derivative=lambda t: np.asarray(t, dtype=float),
        second_derivative=lambda t: np.ones_like(np.asarray(t, dtype=float)),
    ),
    "quartic": ConvexProfile(
        label="quartic",
        value=lambda t: 0.25 * np.asarray(t, dtype=float) ** 4,
        derivative=lambda t: np.asarray(t, dtype=float) ** 3,
        second_derivative=lambda t: 3.0 * np.asarray(t, dtype=float) ** 2,
        degenerate_points=(0.0,),
    ),
    "logcosh": ConvexProfile(
        label="logcosh",
        value=lambda t: _logcosh(np.asarray(t, dtype=float)) + 0.5 * np.asarray(t, dtype=float) ** 2,
        derivative=lambda t: np.tanh(t) + np.asarray(t, dtype=float),
        second_derivative=lambda t: 2.0 - np.tanh(t) ** 2,
    ),
}


# ---------------------------------------------------------------------------
# Data transfer objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparableCompanion:
    """
    Explicit solution u(x, y) = H*(x) - H*(y) of the separable equation.

    Derivatives come from the inverse function theorem rather than from
    differencing quadrature output: u_x = (H')^{-1}(x) and
    u_xx = 1 / H''((H')^{-1}(x)).

    Attributes:
        profile: H.
        conjugate: H* as a profile.
    """

    profile: ConvexProfile
    conjugate: ConvexProfile

    def value(self, point: ArrayLike) -> float:
        x, y = (float(c) for c in point)
        return float(self.conjugate.value(x) - self.conjugate.value(y))

    def gradient(self, point: ArrayLike) -> FloatArray:
        x, y = (float(c) for c in point)
        return np.array([float(self.conjugate.derivative(x)), -float(self.conjugate.derivative(y))])

    def hessian(self, point: ArrayLike) -> FloatArray:
        x, y = (float(c) for c in point)
        return np.diag([float(self.conjugate.second_derivative(x)), -float(self.conjugate.second_derivative(y))])


# ---------------------------------------------------------------------------
# Closed-form builders
# ---------------------------------------------------------------------------

def _norm(p: FloatArray) -> FloatArray:
    return np.sqrt(np.sum(p * p, axis=-1))


def _unit(p: FloatArray, r: FloatArray) -> FloatArray:
    safe = np.where(r > 0, r, 1.0)
    return np.where((r > 0)[..., None], p / safe[..., None], 0.0)


def _quadratic(dim: int) -> Lagrangian:
    eye = np.eye(dim)
    return Lagrangian(
        dim=dim,
        value_at=lambda p: np.sum(p * p, axis=-1),
        grad_at=lambda p: 2.0 * p,
        hess_at=lambda p: np.broadcast_to(2.0 * eye, (*p.shape, dim)).copy(),
        degeneracy=DegeneracySet.empty(),
        label="quadratic",
        uniform_lambda=0.5,
    )


def _minimal_surface(dim: int) -> Lagrangian:
    eye = np.eye(dim)

    def hess(p: FloatArray) -> FloatArray:
        w2 = 1.0 + np.sum(p * p, axis=-1)
        w = np.sqrt(w2)
        outer = p[..., :, None] * p[..., None, :]
        return (eye - outer / w2[..., None, None]) / w[..., None, None]

    return Lagrangian(
        dim=dim,
        value_at=lambda p: np.sqrt(1.0 + np.sum(p * p, axis=-1)),
        grad_at=lambda p: p / np.sqrt(1.0 + np.sum(p * p, axis=-1))[..., None],
        hess_at=hess,
        degeneracy=DegeneracySet.empty(),
        label="minimal-surface",
    )


def _p_laplace(dim: int, exponent: float) -> Lagrangian:
    eye = np.eye(dim)

    def grad(p: FloatArray) -> FloatArray:
        r = _norm(p)
        safe = np.where(r > 0, r, 1.0)
        return (exponent * safe ** (exponent - 2.0))[..., None] * p

    def hess(p: FloatArray) -> FloatArray:
        r = _norm(p)
        r_eff = np.maximum(r, HESSIAN_FLOOR) if exponent < 2 else r
        coef = exponent * r_eff ** (exponent - 2.0)
        u = _unit(p, r)
        outer = u[..., :, None] * u[..., None, :]
        return coef[..., None, None] * (eye + (exponent - 2.0) * outer)

    return Lagrangian(
        dim=dim,
        value_at=lambda p: _norm(p) ** exponent,
        grad_at=grad,
        hess_at=hess,
        degeneracy=DegeneracySet.point() if exponent != 2 else DegeneracySet.empty(),
        label=f"p-laplace(p={exponent:g})",
        uniform_lambda=0.5 if exponent == 2 else None,
    )


def _congestion(dim: int) -> Lagrangian:
    eye = np.eye(dim)

    def value(p: FloatArray) -> FloatArray:
        return np.maximum(_norm(p) - 1.0, 0.0) ** 2

    def grad(p: FloatArray) -> FloatArray:
        r = _norm(p)
        excess = np.maximum(r - 1.0, 0.0)
        return (2.0 * excess)[..., None] * _unit(p, r)

    def hess(p: FloatArray) -> FloatArray:
        r = _norm(p)
        outside = r > 1.0
        safe = np.where(outside, r, 1.0)
        outer = p[..., :, None] * p[..., None, :]
        full = 2.0 * (1.0 - 1.0 / safe)[..., None, None] * eye + 2.0 * outer / (safe**3)[..., None, None]
        return np.where(outside[..., None, None], full, 0.0)

    return Lagrangian(
        dim=dim,
        value_at=value,
        grad_at=grad,
        hess_at=hess,
        degeneracy=DegeneracySet.closed_ball(1.0),
        label="congestion",
    )


def _coordinate_distance(coords: tuple[int, ...], levels: tuple[float, ...]) -> Callable[[FloatArray], FloatArray]:
    """Distance to the union of hyperplanes {p_i = t}, i in coords, t in levels."""
    index = np.asarray(coords, dtype=int)
    targets = np.asarray(levels, dtype=float)

    def distance(p: FloatArray) -> FloatArray:
        selected = p[..., index]
        return np.abs(selected[..., None] - targets).min(axis=(-1, -2))

    return distance


def _anisotropic(exponents: tuple[float, ...]) -> Lagrangian:
    exps = np.asarray(exponents, dtype=float)
    dim = len(exponents)

    def grad(p: FloatArray) -> FloatArray:
        return exps * np.sign(p) * np.abs(p) ** (exps - 1.0)

    def hess(p: FloatArray) -> FloatArray:
        a = np.abs(p)
        a = np.where(exps < 2, np.maximum(a, HESSIAN_FLOOR), a)
        diag = exps * (exps - 1.0) * a ** (exps - 2.0)
        return diag[..., :, None] * np.eye(dim)

    degenerate = tuple(i for i, e in enumerate(exponents) if e != 2)
    if degenerate:
        names = ",".join(f"p{i + 1}=0" for i in degenerate)
        degeneracy = DegeneracySet.custom(f"hyperplanes {names}", distance=_coordinate_distance(degenerate, (0.0,)))
    else:
        degeneracy = DegeneracySet.empty()
    label = "anisotropic(" + ",".join(f"{e:g}" for e in exponents) + ")"
    return Lagrangian(
        dim=dim,
        value_at=lambda p: np.sum(np.abs(p) ** exps, axis=-1),
        grad_at=grad,
        hess_at=hess,
        degeneracy=degeneracy,
        label=label,
        uniform_lambda=0.5 if not degenerate else None,
    )


def _separable(dim: int, profile: ConvexProfile) -> Lagrangian:
    eye = np.eye(dim)
    if profile.degenerate_points:
        degeneracy = DegeneracySet.custom(
            f"coordinate levels {profile.degenerate_points} of {profile.label}",
            distance=_coordinate_distance(tuple(range(dim)), profile.degenerate_points),
        )
    else:
        degeneracy = DegeneracySet.empty()
    uniform = {"half-square": 1.0, "logcosh": 0.5}.get(profile.label)
    return Lagrangian(
        dim=dim,
        value_at=lambda p: np.sum(profile.value(p), axis=-1),
        grad_at=lambda p: np.asarray(profile.derivative(p), dtype=float),
        hess_at=lambda p: np.asarray(profile.second_derivative(p), dtype=float)[..., :, None] * eye,
        degeneracy=degeneracy,
        label=f"separable({profile.label})",
        uniform_lambda=uniform,
    )


def _profile_from(profile: ConvexProfile | str) -> ConvexProfile:
    if isinstance(profile, ConvexProfile):
        return profile
    try:
        return CONVEX_PROFILES[profile]
    except KeyError:
        raise UnknownLagrangianError(
            f"unknown convex profile {profile!r}; choose from {sorted(CONVEX_PROFILES)}"
        ) from None


def _rejection_sample(region: GradientRegion, samples: int, rng: np.random.Generator) -> FloatArray:
    lower, upper = np.asarray(region.lower), np.asarray(region.upper)
    kept: list[FloatArray] = []
    total = 0
    for _ in range(MAX_REJECTION_ROUNDS):
        batch = rng.uniform(lower, upper, size=(max(2 * samples, 64), region.dim))
        batch = batch[region.contains(batch)]
        kept.append(batch)
        total += len(batch)
        if total >= samples:
            break
    drawn = np.concatenate(kept)[:samples]
    if len(drawn) < samples:
        logger.warning("rejection sampling of %s kept only %d of %d points", region.describe(), len(drawn), samples)
    return drawn


def _invert_derivative(profile: ConvexProfile, s: float) -> float:
    """Solve H'(t) = s for t (H' strictly increasing, H'(0) = 0)."""
    if s == 0:
        return 0.0

    def residual(t: float) -> float:
        return float(profile.derivative(t)) - s

    direction = 1.0 if s > 0 else -1.0
    far = direction
    for _ in range(BRACKET_EXPANSIONS):
        gap = residual(far)
        if gap == 0:
            return far
        if gap * direction > 0:
            return float(brentq(residual, 0.0, far, xtol=1e-15, rtol=1e-14, maxiter=500))
        far *= 2.0
    raise InversionFailureError(f"could not bracket (H')^-1({s!r}) for {profile.label}")


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class LagrangianCatalog:
    """Constructors and audits for Lagrangians."""

    @staticmethod
    def convex_profile(name: str) -> ConvexProfile:
        return _profile_from(name)

    @staticmethod
    def make_builtin(
        name: str,
        dim: int = 2,
        p: float | None = None,
        exponents: tuple[float, ...] | None = None,
        profile: ConvexProfile | str | None = None,
    ) -> Lagrangian:
        """Build a builtin Lagrangian.

        Args:
            name: One of BUILTIN_NAMES.
            dim: Gradient dimension (ignored for anisotropic, which uses
                len(exponents)).
            p: Exponent for p-laplace (> 1).
            exponents: Per-coordinate exponents for anisotropic (each > 1).
            profile: Convex profile H (or its builtin name) for separable.

        Returns:
            The Lagrangian with closed-form value, gradient and Hessian.

        Raises:
            InvalidParameterError: On exponents <= 1 or dim < 1.
            UnknownLagrangianError: On an unknown name or profile.
        """
        if dim < 1:
            raise InvalidParameterError("dimension must be >= 1")
        if name == "quadratic":
            return _quadratic(dim)
        if name == "minimal-surface":
            return _minimal_surface(dim)
        if name == "p-laplace":
            if p is None or not p > 1:
                raise InvalidParameterError(f"p-laplace needs p > 1, got {p!r}")
            return _p_laplace(dim, float(p))
        if name == "congestion":
            return _congestion(dim)
        if name == "anisotropic":
            if not exponents:
                raise InvalidParameterError("anisotropic needs one exponent per coordinate")
            if any(not e > 1 for e in exponents):
                raise InvalidParameterError(f"anisotropic exponents must all exceed 1, got {exponents}")
            return _anisotropic(tuple(float(e) for e in exponents))
        if name == "separable":
            return _separable(dim, _profile_from(profile if profile is not None else "half-square"))
        raise UnknownLagrangianError(f"unknown Lagrangian {name!r}; choose from {', '.join(BUILTIN_NAMES)}")

    @staticmethod
    def expression_lagrangian(src: str, dim: int = 2) -> Lagrangian:
        """Lagrangian from an expression in p1..pn with numeric derivatives.

        Raises:
            ParseError: If ``src`` does not parse.
        """
        if not 1 <= dim <= len(LAGRANGIAN_VARIABLES):
            raise InvalidParameterError(f"expression Lagrangians support dimensions 1..{len(LAGRANGIAN_VARIABLES)}")
        variables = LAGRANGIAN_VARIABLES[:dim]
        expr = ExpressionEngine.parse(src, variables)
        value = ExpressionEngine.compile(expr, variables)

        def grad(p: FloatArray) -> FloatArray:
            return central_gradient(value, p, EXPRESSION_GRADIENT_STEP)

        def hess(p: FloatArray) -> FloatArray:
            return central_hessian(value, p, EXPRESSION_HESSIAN_STEP)

        def flat(p: FloatArray) -> NDArray[np.bool_]:
            return np.linalg.eigvalsh(hess(p)).min(axis=-1) <= EXPRESSION_DERIVATIVE_NOISE

        return Lagrangian(
            dim=dim,
            value_at=value,
            grad_at=grad,
            hess_at=hess,
            degeneracy=DegeneracySet.custom("numerically flat Hessian", indicator=flat),
            label=f"{EXPRESSION_PREFIX}{ExpressionEngine.to_source(expr)}",
            derivative_noise=EXPRESSION_DERIVATIVE_NOISE,
        )

    @staticmethod
    def from_spec(
        spec: str,
        dim: int = 2,
        p: float | None = None,
        exponents: tuple[float, ...] | None = None,
        profile: str | None = None,
    ) -> Lagrangian:
        """Resolve a CLI-style spec: a builtin name or ``expr:<expression>``."""
        if spec.startswith(EXPRESSION_PREFIX):
            return LagrangianCatalog.expression_lagrangian(spec[len(EXPRESSION_PREFIX):], dim)
        return LagrangianCatalog.make_builtin(spec, dim=dim, p=p, exponents=exponents, profile=profile)

    @staticmethod
    def ellipticity_bounds(
        F: Lagrangian,
        region: GradientRegion,
        samples: int = 1000,
        seed: int = 1,
    ) -> EllipticityWindow:
        """Min/max Hessian eigenvalues of F over a sampled gradient region.

        The sample is the region's anchors (centre and axis extremes) plus
        ``samples`` seeded rejection samples. A window whose smallest
        eigenvalue vanishes is flagged degenerate.
        """
        if samples < 1:
            raise InvalidParameterError("samples must be >= 1")
        if region.dim != F.dim:
            raise InvalidParameterError("region dimension does not match the Lagrangian")
        rng = np.random.default_rng(seed)
        anchors = region.anchors()
        points = np.vstack([anchors[region.contains(anchors)], _rejection_sample(region, samples, rng)])
        eigenvalues = np.linalg.eigvalsh(F.hessian(points))
        lam_min = float(eigenvalues.min())
        lam_max = float(eigenvalues.max())
        degenerate = lam_min <= CONVEXITY_TOL
        if bool(np.all(F.degeneracy.contains(points))):
            logger.warning("region %s lies inside the degeneracy set of %s", region.describe(), F.label)
            degenerate = True
        return EllipticityWindow(
            lambda_min=max(lam_min, 0.0),
            lambda_max=max(lam_max, 0.0),
            region=region.describe(),
            degenerate=degenerate,
            samples=len(points),
        )

    @staticmethod
    def convexity_audit(
        F: Lagrangian,
        box: GradientRegion,
        grid: int = 9,
        seed: int = 1,
        tol: float = CONVEXITY_TOL,
    ) -> ProbeReport:
        """Midpoint convexity and Hessian sign over a lattice of gradients.

        Passes iff the worst midpoint violation and the most negative
        Hessian eigenvalue are both >= -tol.
        """
        if grid < 2:
            raise InvalidParameterError("audit grid must be >= 2")
        axes = [np.linspace(lo, hi, grid) for lo, hi in zip(box.lower, box.upper)]
        points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, F.dim)
        values = F.value(points)
        min_eig = float(np.linalg.eigvalsh(F.hessian(points)).min())
        if F.derivative_noise:
            tol += F.derivative_noise * max(1.0, float(np.abs(values).max()))

        rng = np.random.default_rng(seed)
        pairs = min(4 * len(points), 20_000)
        i = rng.integers(0, len(points), size=pairs)
        j = rng.integers(0, len(points), size=pairs)
        p, q = points[i], points[j]
        gap = 0.5 * (F.value(p) + F.value(q)) - F.value(0.5 * (p + q))
        violation = float(max(0.0, -gap.min()))

        margin = min(-violation, min_eig) + tol
        return ProbeReport.from_margin(
            "convexity",
            {"violation": violation, "min_eigenvalue": min_eig, "samples": float(len(points))},
            margin,
            notes=(F.label,),
        )

    @staticmethod
    def legendre_1d(H: ConvexProfile, x: float) -> float:
        """H*(x) = ∫_0^x (H')^{-1}(s) ds by bracketing inversion and adaptive quadrature.

        Raises:
            InversionFailureError: If (H')^{-1} cannot be bracketed.
        """
        x = float(x)
        if x == 0:
            return 0.0
        value, _ = quad(lambda s: _invert_derivative(H, s), 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
        return float(value)

    @staticmethod
    def conjugate_profile(H: ConvexProfile) -> ConvexProfile:
        """H* as a convex profile: derivative (H')^{-1}, second derivative 1/H''((H')^{-1})."""

        def value(x: ArrayLike) -> FloatArray | float:
            arr = np.asarray(x, dtype=float)
            out = np.vectorize(lambda t: LagrangianCatalog.legendre_1d(H, t), otypes=[float])(arr)
            return float(out) if out.ndim == 0 else out

        def derivative(s: ArrayLike) -> FloatArray | float:
            arr = np.asarray(s, dtype=float)
            out = np.vectorize(lambda v: _invert_derivative(H, v), otypes=[float])(arr)
            return float(out) if out.ndim == 0 else out

        def second_derivative(s: ArrayLike) -> FloatArray | float:
            t = np.asarray(derivative(s), dtype=float)
            with np.errstate(divide="ignore"):
                out = 1.0 / np.asarray(H.second_derivative(t), dtype=float)
            return float(out) if out.ndim == 0 else out

        return ConvexProfile(
            label=f"conjugate({H.label})",
            value=value,
            derivative=derivative,
            second_derivative=second_derivative,
        )

    @staticmethod
    def separable_example(H: ConvexProfile | str) -> tuple[Lagrangian, SeparableCompanion]:
        """F(p, q) = H(p) + H(q) with its explicit solution H*(x) - H*(y)."""
        profile = _profile_from(H)
        F = _separable(2, profile)
        return F, SeparableCompanion(profile=profile, conjugate=LagrangianCatalog.conjugate_profile(profile))
