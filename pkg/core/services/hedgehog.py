"""
Hedgehog service.

One-homogeneous functions and the hypersurfaces ∇u(S^{n-1}) they define:
pointwise derivatives, Hessian spectra, sampled clouds with estimated
normals, the normal and second-form correspondences, the four-dimensional
saddle example, homogeneous solutions of divergence-form equations and
the zero-homogeneous counterexample.

Everything here is pointwise sampling; only the counterexample builds a
grid.

NO dependencies on config, etl or infrastructure.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from itertools import combinations, product

import numpy as np
from numpy.polynomial import Legendre
from numpy.typing import ArrayLike, NDArray
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from core.domain.entities.grid import Grid, ScalarField
from core.domain.entities.homogeneous import HedgehogCloud, HomogeneousFunction
from core.domain.entities.reports import ProbeReport
from core.domain.exceptions import (
    InvalidParameterError,
    NotApplicableError,
    NotEllipticError,
    SingularPointError,
)
from core.domain.value_objects.mask_kind import MaskKind
from core.services.finite_differences import central_gradient, central_hessian
from core.services.regularity_probes import RegularityProbes

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

FD_RELATIVE_STEP: float = 1e-4
NEIGHBOURS: int = 12
FLAG_FACTOR: float = 10.0
DEGENERATE_SPREAD: float = 1e-9
RESIDUAL_FLOOR: float = 1e-12
CLIFFORD_WIDTH: float = 0.05
ALIGNMENT_TOL: float = 1e-3
ALIGNMENT_PASS_FRACTION: float = 0.99
MIN_REGULAR_POINTS: int = 100
SECOND_FORM_PATCH: float = 1e-2
SECOND_FORM_TOL: float = 0.05
NULL_EIGENVALUE: float = 1e-4
SIGN_TOL: float = 1e-6
RADIAL_RESIDUAL_TOL: float = 1e-3
RADIAL_FD_STEP: float = 1e-3
ZERO_HOMOGENEOUS_INNER: float = 0.01
ENERGY_TOL: float = 0.1
DEFAULT_RATIO_CAP: float = 100.0


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _as_points(f: HomogeneousFunction, x: ArrayLike) -> FloatArray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != f.dim:
        raise InvalidParameterError(f"points must have {f.dim} coordinates")
    if np.any(np.linalg.norm(pts, axis=-1) == 0):
        raise SingularPointError("homogeneous function evaluated at the origin")
    return pts


def _gradient(f: HomogeneousFunction, pts: FloatArray) -> FloatArray:
    return central_gradient(f.value, pts, FD_RELATIVE_STEP * np.linalg.norm(pts, axis=-1))


def _hessian(f: HomogeneousFunction, pts: FloatArray) -> FloatArray:
    return central_hessian(f.value, pts, FD_RELATIVE_STEP * np.linalg.norm(pts, axis=-1))


def _tangent_frames(points: FloatArray) -> FloatArray:
    """Orthonormal bases of x^⊥ for unit x, shape (m, n, n - 1), by Householder reflection."""
    n = points.shape[-1]
    v = points.copy()
    v[:, 0] += np.where(points[:, 0] >= 0, 1.0, -1.0)
    reflect = np.eye(n) - 2.0 * v[:, :, None] * v[:, None, :] / np.sum(v * v, axis=1)[:, None, None]
    return reflect[:, :, 1:]


def _unit(points: FloatArray) -> FloatArray:
    return points / np.linalg.norm(points, axis=-1, keepdims=True)


def _tangential_eigenvalues(hessians: FloatArray, points: FloatArray) -> FloatArray:
    frames = _tangent_frames(_unit(points))
    restricted = np.einsum("mik,mij,mjl->mkl", frames, hessians, frames)
    return np.linalg.eigvalsh(restricted)


def _clifford_angle(points: FloatArray) -> FloatArray:
    return np.arctan2(np.linalg.norm(points[:, 2:4], axis=1), np.linalg.norm(points[:, 0:2], axis=1))


def _orientation(points: FloatArray, offsets: FloatArray, neighbours: NDArray[np.int_]) -> NDArray[np.int_]:
    """Sign of det of the least-squares Jacobian of x -> ∇u(x) on x^⊥.

    Input and output share the frame of x^⊥, so the sign does not depend on
    the basis.
    """
    frames = _tangent_frames(points)
    dx = np.einsum("mkn,mnd->mkd", points[neighbours] - points[:, None, :], frames)
    dy = np.einsum("mkn,mnd->mkd", offsets, frames)
    jacobian = np.linalg.pinv(dx) @ dy
    return np.sign(np.linalg.det(jacobian)).astype(int)


def _jet_normals(offsets: FloatArray, d: int) -> tuple[FloatArray, FloatArray]:
    """Normals and relative residuals of quadratic height fits through each query image.

    ``offsets`` holds neighbour displacements of shape (m, k, d + 1); rows
    of zeros are left out of the fit.
    """
    _, sigma, vt = np.linalg.svd(offsets, full_matrices=False)
    tangent = vt[:, :d, :]
    axis = vt[:, d, :]
    w = np.einsum("mkn,mdn->mkd", offsets, tangent)
    h = np.einsum("mkn,mn->mk", offsets, axis)
    columns = [w, 0.5 * w**2]
    pairs = list(combinations(range(d), 2))
    if pairs:
        columns.append(np.stack([w[..., a] * w[..., b] for a, b in pairs], axis=-1))
    design = np.concatenate(columns, axis=-1)
    coef = (np.linalg.pinv(design) @ h[..., None])[..., 0]

    normals = axis - np.einsum("md,mdn->mn", coef[:, :d], tangent)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    pivot = np.argmax(np.abs(normals), axis=1)
    normals *= np.sign(normals[np.arange(len(normals)), pivot])[:, None]

    used = np.count_nonzero(np.any(offsets != 0.0, axis=-1), axis=1)
    misfit = h - np.einsum("mkq,mq->mk", design, coef)
    radius = np.max(np.linalg.norm(offsets, axis=-1), axis=1)
    fitted = (used >= design.shape[-1] + 2) & (sigma[:, d - 1] > DEGENERATE_SPREAD)
    with np.errstate(divide="ignore", invalid="ignore"):
        rms = np.sqrt(np.sum(misfit**2, axis=1) / np.maximum(used, 1))
        residuals = np.where(fitted, rms / radius, np.nan)
    return normals, residuals


def _components(
    neighbours: NDArray[np.int_],
    orientation: NDArray[np.int_],
    singular: NDArray[np.bool_],
) -> tuple[NDArray[np.int_], int]:
    """Components of the neighbour graph on regular points with equal orientation.

    Components with fewer than NEIGHBOURS + 1 points get label -1.
    """
    m, k = neighbours.shape
    labels = np.full(m, -1, dtype=int)
    regular = np.flatnonzero(~singular)
    if len(regular) == 0:
        return labels, 0
    rows = np.repeat(np.arange(m), k)
    cols = neighbours.ravel()
    keep = ~singular[rows] & ~singular[cols] & (orientation[rows] == orientation[cols])
    graph = coo_matrix((np.ones(int(np.count_nonzero(keep))), (rows[keep], cols[keep])), shape=(m, m))
    _, component = connected_components(graph, directed=False)
    sizes = np.bincount(component[regular], minlength=int(component.max()) + 1)
    large = np.flatnonzero(sizes >= NEIGHBOURS + 1)
    relabel = np.full(len(sizes), -1, dtype=int)
    relabel[large] = np.arange(len(large))
    labels[regular] = relabel[component[regular]]
    return labels, len(large)


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

def _fourd_value(x: FloatArray) -> FloatArray:
    a = x[..., 0] ** 2 + x[..., 1] ** 2
    b = x[..., 2] ** 2 + x[..., 3] ** 2
    return (a - b) / np.sqrt(a + b)


def _norm(x: FloatArray) -> FloatArray:
    return np.linalg.norm(x, axis=-1)


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class Hedgehog:
    """Homogeneous-function fixtures and hedgehog correspondences."""

    # -- fixtures -----------------------------------------------------------

    @staticmethod
    def fourd_example() -> HomogeneousFunction:
        """u(z1, z2) = (|z1|² - |z2|²) / sqrt(|z1|² + |z2|²) on R⁴ = C²."""
        return HomogeneousFunction(
            dim=4, trace=_fourd_value, degree=1.0, label="fourd",
            closed_form=_fourd_value,
        )

    @staticmethod
    def abs_fixture(n: int = 2) -> HomogeneousFunction:
        return HomogeneousFunction(
            dim=n, trace=lambda unit: np.ones(unit.shape[:-1]), label="abs", closed_form=_norm,
        )

    @staticmethod
    def linear_fixture(e: ArrayLike) -> HomogeneousFunction:
        """u = e·x; the hedgehog collapses to the single point e."""
        direction = np.asarray(e, dtype=float)
        if direction.ndim != 1 or direction.size < 2:
            raise InvalidParameterError("linear fixture needs a direction with at least 2 coordinates")

        def dot(x: FloatArray) -> FloatArray:
            return x @ direction

        return HomogeneousFunction(dim=direction.size, trace=dot, label="linear", closed_form=dot)

    @staticmethod
    def perturbed_support(eps: float) -> HomogeneousFunction:
        """2D u = |x|(1 + eps·cos 2θ); a smooth convex support function for |eps| < 1/3."""
        if not abs(eps) < 1.0 / 3.0:
            raise InvalidParameterError(f"support perturbation needs |eps| < 1/3, got {eps}")

        def trace(unit: FloatArray) -> FloatArray:
            return 1.0 + eps * (unit[..., 0] ** 2 - unit[..., 1] ** 2)

        return HomogeneousFunction(dim=2, trace=trace, label=f"support(eps={eps!r})")

    @staticmethod
    def polynomial_fixture(kind: str) -> HomogeneousFunction:
        """Degree-2 fixtures: ``saddle`` x1² - x2² and ``bowl`` x1² + x2²."""
        signs = {"saddle": -1.0, "bowl": 1.0}
        if kind not in signs:
            raise InvalidParameterError(f"unknown polynomial fixture {kind!r}; expected saddle or bowl")
        s = signs[kind]

        def value(x: FloatArray) -> FloatArray:
            return x[..., 0] ** 2 + s * x[..., 1] ** 2

        return HomogeneousFunction(dim=2, trace=value, degree=2.0, label=kind, closed_form=value)

    @staticmethod
    def zero_homogeneous_function() -> HomogeneousFunction:
        """v(x) = x3/|x| on R³."""
        return HomogeneousFunction(dim=3, trace=lambda unit: unit[..., 2], degree=0.0, label="x3/|x|")

    @staticmethod
    def sphere_samples(n: int, m: int, seed: int = 1) -> FloatArray:
        """m seeded uniform points on S^{n-1}."""
        if n < 2 or m < 1:
            raise InvalidParameterError("sphere samples need n >= 2 and m >= 1")
        rng = np.random.default_rng(seed)
        return _unit(rng.standard_normal((m, n)))

    @staticmethod
    def away_from_clifford(points: ArrayLike, width: float = CLIFFORD_WIDTH) -> FloatArray:
        """Drop points of S³ within angular distance ``width`` of {|z1| = |z2|}."""
        pts = np.asarray(points, dtype=float)
        return pts[Hedgehog.clifford_mask(pts, width)]

    # -- pointwise ----------------------------------------------------------

    @staticmethod
    def eval_homogeneous(f: HomogeneousFunction, x: ArrayLike) -> tuple[float, FloatArray, FloatArray]:
        """Value, gradient and Hessian at one point (differences with step 1e-4·|x|).

        Raises:
            SingularPointError: If x = 0.
        """
        pt = _as_points(f, x)
        if pt.ndim != 1:
            raise InvalidParameterError("eval_homogeneous takes a single point")
        batch = pt[None, :]
        value = float(f.value(pt))
        return value, _gradient(f, batch)[0], _hessian(f, batch)[0]

    @staticmethod
    def hessian_spectrum(f: HomogeneousFunction, x: ArrayLike) -> list[float]:
        _, _, hess = Hedgehog.eval_homogeneous(f, x)
        return sorted(float(v) for v in np.linalg.eigvalsh(hess))

    @staticmethod
    def elliptic_solvability_check(
        f: HomogeneousFunction,
        samples: ArrayLike,
        ratio_cap: float = DEFAULT_RATIO_CAP,
    ) -> ProbeReport:
        """Mixed-sign spectrum with bounded ratio at every sample.

        For degree-1 functions the radial null direction is removed before
        the signs are read. The worst ratio max|λ+|/max|λ-| (or its
        reciprocal) must stay below ``ratio_cap``; a one-signed spectrum
        counts as an infinite ratio.
        """
        pts = _as_points(f, samples)
        if pts.ndim != 2 or len(pts) == 0:
            raise InvalidParameterError("samples must be a non-empty (m, n) array")
        hess = _hessian(f, pts)
        eig = _tangential_eigenvalues(hess, pts) if f.degree == 1.0 else np.linalg.eigvalsh(hess)
        scale = np.max(np.abs(eig), axis=1)
        tol = np.maximum(SIGN_TOL, SIGN_TOL * scale)[:, None]
        pos = np.max(np.where(eig > tol, eig, 0.0), axis=1)
        neg = np.max(np.where(eig < -tol, -eig, 0.0), axis=1)
        mixed = (pos > 0) & (neg > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(mixed, np.maximum(pos / neg, neg / pos), np.inf)
        worst = float(np.max(ratios))
        failures = int(np.count_nonzero(~mixed))
        if failures:
            logger.info("%s: %d of %d samples have a one-signed spectrum", f.label, failures, len(pts))
        return ProbeReport.from_margin(
            "elliptic_solvability",
            {"worst_ratio": worst, "ratio_cap": float(ratio_cap), "samples": float(len(pts)),
             "one_signed": float(failures)},
            ratio_cap - worst if math.isfinite(worst) else -math.inf,
        )

    # -- clouds -------------------------------------------------------------

    @staticmethod
    def hedgehog_cloud(f: HomogeneousFunction, sphere_samples: int, seed: int = 1) -> HedgehogCloud:
        """Sample ∇u on S^{n-1} and fit the image hypersurface around every image.

        Neighbourhoods are the 12 nearest images in a KD-tree over the cloud.
        Per point the fit gives:

        * the orientation, sign det of the least-squares map from sphere
          displacements to image displacements on x_i^⊥;
        * the normal, from a quadratic height fit through ∇u(x_i) over the
          neighbours of the same orientation (other sheets are left out);
        * the residual, RMS height misfit over the neighbourhood radius.

        A point is singular when the images do not spread, too few
        neighbours share its orientation for the fit, its residual exceeds
        10 times the median, or its component on the neighbour graph is
        smaller than one neighbourhood. Components are counted on the
        KD-tree graph of regular images, with edges only between points of
        equal orientation.
        """
        n = f.dim
        if sphere_samples < 10 * n * n:
            raise InvalidParameterError(f"need at least {10 * n * n} sphere samples in dimension {n}")
        points = Hedgehog.sphere_samples(n, sphere_samples, seed)
        images = _gradient(f, points)
        _, neighbours = cKDTree(images).query(images, k=NEIGHBOURS + 1)

        offsets = images[neighbours] - images[:, None, :]
        orientation = _orientation(points, offsets, neighbours)
        same = orientation[neighbours] == orientation[:, None]
        normals, residuals = _jet_normals(offsets * same[..., None], n - 1)
        residuals[orientation == 0] = np.nan

        finite = np.isfinite(residuals)
        singular = ~finite
        if np.any(finite):
            median = max(float(np.median(residuals[finite])), RESIDUAL_FLOOR)
            singular |= finite & (residuals > FLAG_FACTOR * median)

        labels, components = _components(neighbours, orientation, singular)
        singular |= labels < 0
        logger.info(
            "%s: hedgehog cloud with %d samples, %d singular, %d components",
            f.label, sphere_samples, int(np.count_nonzero(singular)), components,
        )
        return HedgehogCloud(
            points=points, images=images, normals=normals, residuals=residuals, singular=singular,
            orientation=orientation, labels=labels, components=components, seed=seed,
        )

    @staticmethod
    def clifford_mask(points: ArrayLike, width: float = CLIFFORD_WIDTH) -> NDArray[np.bool_]:
        """True for points of S³ farther than ``width`` (angle) from {|z1| = |z2|}."""
        pts = np.asarray(points, dtype=float)
        return np.abs(_clifford_angle(pts) - math.pi / 4.0) > width

    @staticmethod
    def normal_correspondence_check(
        cloud: HedgehogCloud,
        f: HomogeneousFunction | None = None,
        keep: NDArray[np.bool_] | None = None,
    ) -> ProbeReport:
        """Fraction of regular points whose normal satisfies |ν·x| >= 1 - 1e-3.

        ``keep`` restricts the check to a subset of the samples, e.g.
        ``Hedgehog.clifford_mask(cloud.points)`` for the four-dimensional
        example.

        Raises:
            NotApplicableError: With fewer than 100 regular points in the subset.
        """
        regular = ~cloud.singular
        if keep is not None:
            regular &= np.asarray(keep, dtype=bool)
        count = int(np.count_nonzero(regular))
        if count < MIN_REGULAR_POINTS:
            raise NotApplicableError(
                f"normal correspondence needs {MIN_REGULAR_POINTS} regular points, got {count}"
            )
        scores = np.abs(np.sum(cloud.normals[regular] * cloud.points[regular], axis=1))
        fraction = float(np.mean(scores >= 1.0 - ALIGNMENT_TOL))
        notes = (f.label,) if f is not None else ()
        return ProbeReport.from_margin(
            "normal_correspondence",
            {"fraction": fraction, "worst_alignment": float(np.min(scores)),
             "regular_points": float(count), "components": float(cloud.components)},
            fraction - ALIGNMENT_PASS_FRACTION,
            notes,
        )

    @staticmethod
    def second_form_check(f: HomogeneousFunction, x: ArrayLike, patch: float = SECOND_FORM_PATCH) -> ProbeReport:
        """Compare the fitted second fundamental form at ∇u(x) with the inverse tangential Hessian.

        Raises:
            NotApplicableError: If a tangential Hessian eigenvalue is below 1e-4 in size.
        """
        pt = _as_points(f, x)
        n = f.dim
        unit = pt / np.linalg.norm(pt)
        frame = _tangent_frames(unit[None, :])[0]
        hess = _hessian(f, unit[None, :])[0]
        tangential = frame.T @ hess @ frame
        eig, vecs = np.linalg.eigh(tangential)
        if np.min(np.abs(eig)) < NULL_EIGENVALUE:
            raise NotApplicableError(f"tangential Hessian is degenerate at {tuple(unit)}: {eig}")
        expected = vecs @ np.diag(1.0 / eig) @ vecs.T

        coeffs = np.array(list(product((-1.0, -0.5, 0.0, 0.5, 1.0), repeat=n - 1)))
        preimages = _unit(unit + patch * coeffs @ frame.T)
        delta = _gradient(f, preimages) - _gradient(f, unit[None, :])[0]
        w = delta @ frame
        z = delta @ unit
        pairs = list(combinations(range(n - 1), 2))
        design = np.column_stack(
            [w] + [0.5 * w[:, i] ** 2 for i in range(n - 1)] + [w[:, i] * w[:, j] for i, j in pairs]
        )
        solution, *_ = np.linalg.lstsq(design, z, rcond=None)
        shape = np.diag(solution[n - 1: 2 * (n - 1)])
        for (i, j), c in zip(pairs, solution[2 * (n - 1):]):
            shape[i, j] = shape[j, i] = c
        fitted = -shape
        error = float(np.linalg.norm(fitted - expected) / np.linalg.norm(expected))
        measured = {"relative_error": error, "patch": float(patch)}
        measured.update({f"eigenvalue_{i}": float(v) for i, v in enumerate(eig)})
        return ProbeReport.from_margin("second_form", measured, SECOND_FORM_TOL - error, (f.label,))

    # -- homogeneous solutions ----------------------------------------------

    @staticmethod
    def radial_homogeneous_solution(
        alpha: float,
        k: int,
        n: int = 2,
        seed: int = 1,
    ) -> tuple[HomogeneousFunction, float, ProbeReport]:
        """u = |x|^α g solving div((I + μ x̂⊗x̂)∇u) = 0.

        g is cos(kθ) for n = 2 and the degree-k zonal harmonic for n = 3;
        μ = λ_g / (α(α + n - 2)) - 1. The report checks the divergence of the
        flux by central differences on the annulus 1/4 <= |x| <= 3/4.

        Raises:
            NotEllipticError: If 1 + μ <= 0.
        """
        if not alpha > 0:
            raise InvalidParameterError("alpha must be positive")
        if k < 0 or int(k) != k:
            raise InvalidParameterError("harmonic index k must be a non-negative integer")
        if n not in (2, 3):
            raise InvalidParameterError("radial homogeneous solutions are built for n = 2 or 3")
        k = int(k)
        lam = float(k * k) if n == 2 else float(k * (k + 1))
        mu = lam / (alpha * (alpha + n - 2)) - 1.0
        if mu <= -1.0:
            raise NotEllipticError(f"mu = {mu!r} gives coefficients that are not elliptic")

        trace, sphere_gradient = Hedgehog._harmonic(k, n)
        u = HomogeneousFunction(dim=n, trace=trace, degree=float(alpha), label=f"radial(alpha={alpha!r},k={k})")

        def flux(x: FloatArray) -> FloatArray:
            r = np.linalg.norm(x, axis=-1, keepdims=True)
            xhat = x / r
            grad = alpha * r ** (alpha - 1.0) * trace(xhat)[..., None] * xhat + r ** (alpha - 1.0) * sphere_gradient(xhat)
            return grad + mu * np.sum(xhat * grad, axis=-1, keepdims=True) * xhat

        points = Hedgehog._annulus(n, seed)
        divergence = np.zeros(len(points))
        for axis in range(n):
            shift = RADIAL_FD_STEP * np.eye(n)[axis]
            divergence += (flux(points + shift)[:, axis] - flux(points - shift)[:, axis]) / (2.0 * RADIAL_FD_STEP)
        scale = float(np.max(np.abs(u.value(points)) / np.sum(points**2, axis=1)))
        residual = float(np.max(np.abs(divergence)) / scale)
        logger.info("radial solution alpha=%s k=%d n=%d: mu=%s residual=%.3e", alpha, k, n, mu, residual)
        report = ProbeReport.from_margin(
            "radial_homogeneous",
            {"alpha": float(alpha), "k": float(k), "n": float(n), "lambda_g": lam, "mu": mu,
             "window_min": min(1.0, 1.0 + mu), "window_max": max(1.0, 1.0 + mu), "residual": residual},
            RADIAL_RESIDUAL_TOL - residual,
        )
        return u, mu, report

    @staticmethod
    def _harmonic(k: int, n: int) -> tuple[Callable[[FloatArray], FloatArray], Callable[[FloatArray], FloatArray]]:
        """Trace g and its spherical gradient at unit vectors."""
        if n == 2:
            def trace(unit: FloatArray) -> FloatArray:
                return np.cos(k * np.arctan2(unit[..., 1], unit[..., 0]))

            def sphere_gradient(unit: FloatArray) -> FloatArray:
                theta = np.arctan2(unit[..., 1], unit[..., 0])
                tangent = np.stack([-unit[..., 1], unit[..., 0]], axis=-1)
                return (-k * np.sin(k * theta))[..., None] * tangent

            return trace, sphere_gradient

        zonal = Legendre.basis(k)
        slope = zonal.deriv()
        pole = np.array([0.0, 0.0, 1.0])

        def trace(unit: FloatArray) -> FloatArray:
            return zonal(unit[..., 2])

        def sphere_gradient(unit: FloatArray) -> FloatArray:
            t = unit[..., 2]
            return slope(t)[..., None] * (pole - t[..., None] * unit)

        return trace, sphere_gradient

    @staticmethod
    def _annulus(n: int, seed: int) -> FloatArray:
        radii = np.linspace(0.25, 0.75, 9)
        if n == 2:
            angles = 2.0 * np.pi * (np.arange(32) + 0.5) / 32
            directions = np.column_stack([np.cos(angles), np.sin(angles)])
        else:
            directions = Hedgehog.sphere_samples(3, 64, seed)
        return (radii[:, None, None] * directions[None, :, :]).reshape(-1, n)

    @staticmethod
    def zero_homogeneous_counterexample(resolution: int = 65) -> tuple[ScalarField, ProbeReport]:
        """v = x3/|x| on a 3D ball lattice (v(0) = 0).

        The report checks that the oscillation over dyadic balls stays 2
        down to the grid scale and that the Dirichlet energy of
        B_1 minus B_0.01 matches (8π/3)(1 - 0.01) within 10%.
        """
        grid = Grid(dim=3, resolution=resolution, mask_kind=MaskKind.BALL)
        v = Hedgehog.zero_homogeneous_function()
        coords = grid.coordinates
        radius = grid.radius
        values = np.full(grid.shape, np.nan)
        nonzero = grid.active & (radius > 0)
        values[nonzero] = v.value(coords[nonzero])
        values[grid.active & (radius == 0)] = 0.0
        field = ScalarField(grid, values)

        radii = []
        r = 0.5
        while r >= 2.0 * grid.h:
            radii.append(r)
            r /= 2.0
        oscillations = [RegularityProbes.oscillation(field, None, rr) for rr in radii]

        shell = grid.interior & (radius > ZERO_HOMOGENEOUS_INNER)
        energy = float(np.sum((1.0 - (coords[shell][:, 2] / radius[shell]) ** 2) / radius[shell] ** 2) * grid.h**3)
        oracle = 8.0 * math.pi / 3.0 * (1.0 - ZERO_HOMOGENEOUS_INNER)
        energy_error = abs(energy - oracle) / oracle
        osc_error = max(abs(o - 2.0) for o in oscillations)
        report = ProbeReport.from_margin(
            "zero_homogeneous",
            {"min_oscillation": min(oscillations), "smallest_radius": radii[-1], "energy": energy,
             "energy_oracle": oracle, "energy_error": energy_error},
            min(ENERGY_TOL - energy_error, 1e-12 - osc_error),
        )
        return field, report
