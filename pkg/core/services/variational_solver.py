"""
Variational solver.

Minimizes the discrete energy J_h(u) = Σ_cells h^n F(∇_h u) over interior
node values with the boundary values fixed. Cell gradients come from
corner differences, so J_h is convex in the node values whenever F is.

Degenerate Lagrangians are solved through the continuation
F_eps = F + eps|p|^2, eps -> eps/10, warm-starting each stage.

NO dependencies on config, etl or infrastructure.
"""

from __future__ import annotations

import itertools
import logging
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.sparse.linalg import MatrixRankWarning, spsolve
from scipy.spatial import cKDTree

from core.domain.entities.grid import BoundaryAssignment, Grid, ScalarField
from core.domain.entities.lagrangian import EllipticityWindow, GradientRegion, Lagrangian
from core.domain.entities.reports import ConvergenceReport
from core.domain.exceptions import (
    InvalidParameterError,
    InvalidTestFunctionError,
    NonConvexLagrangianError,
    NotApplicableError,
)
from core.domain.value_objects.mask_kind import MaskKind
from core.domain.value_objects.verdicts import SolveMethod
from core.services.field_calculus import FieldCalculus
from core.services.lagrangian_catalog import CONVEXITY_TOL, LagrangianCatalog

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DEFAULT_SMOOTHING_EPS: float = 1e-3
SMOOTHING_FLOOR: float = 1e-9
SMOOTHING_FACTOR: float = 10.0

ARMIJO_C: float = 1e-4
ROUNDOFF_ALLOWANCE: float = 1e-13
MAX_BACKTRACKS: int = 60
STAGNATION_WINDOW: int = 500
TEST_FUNCTION_TOL: float = 1e-14

BARRIER_NEIGHBOURS: int = 9
AUDIT_GRID: int = 9


# ---------------------------------------------------------------------------
# Data transfer objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolveOptions:
    """
    Solver settings.

    Attributes:
        tol_rel_energy: Relative energy accuracy certified by the residual rule.
        tol_residual: Stop when max |∂J_h/∂u_interior| <= tol_residual * h^n.
        max_iters: Iteration budget over all continuation stages.
        smoothing_eps: First continuation eps; None picks 0 for uniformly
            convex F and 1e-3 for degenerate F.
        method: Descent method.
        audit: Run the convexity audit before solving.
    """

    tol_rel_energy: float = 1e-10
    tol_residual: float = 1e-8
    max_iters: int = 200_000
    smoothing_eps: float | None = None
    method: SolveMethod = SolveMethod.NEWTON_DAMPED
    audit: bool = True

    def __post_init__(self) -> None:
        if not (self.tol_rel_energy > 0 and self.tol_residual > 0):
            raise InvalidParameterError("solver tolerances must be positive")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        if self.smoothing_eps is not None and self.smoothing_eps < 0:
            raise InvalidParameterError("smoothing_eps must be non-negative")

    def schedule(self, F: Lagrangian) -> tuple[float, ...]:
        """Continuation eps values, largest first (empty when no smoothing)."""
        eps = self.smoothing_eps
        if eps is None:
            eps = DEFAULT_SMOOTHING_EPS if F.is_degenerate else 0.0
        stages: list[float] = []
        while eps >= SMOOTHING_FLOOR:
            stages.append(eps)
            eps /= SMOOTHING_FACTOR
        return tuple(stages)


@dataclass(frozen=True, eq=False)
class CellOperators:
    """
    Sparse cell-gradient operators of a grid.

    ``derivatives[a]`` maps flat node values to the a-th component of the
    gradient on every active cell (cells whose 2^n corners are all active).
    """

    grid: Grid
    derivatives: tuple[sparse.csr_matrix, ...]

    @classmethod
    def build(cls, grid: Grid) -> CellOperators:
        return _cell_operators(grid)

    @property
    def cell_count(self) -> int:
        return self.derivatives[0].shape[0]

    @property
    def weight(self) -> float:
        return self.grid.h**self.grid.dim

    def cell_gradients(self, flat: FloatArray) -> FloatArray:
        return np.stack([D @ flat for D in self.derivatives], axis=-1)

    def pullback(self, fluxes: FloatArray) -> FloatArray:
        """h^n Σ_a D_aᵀ fluxes[:, a]: the node gradient of Σ h^n F(∇_h u)."""
        total = np.zeros(self.grid.size)
        for a, D in enumerate(self.derivatives):
            total += D.T @ fluxes[:, a]
        return self.weight * total

    def hessian(self, coefficients: FloatArray) -> sparse.csr_matrix:
        n = self.grid.dim
        total = sparse.csr_matrix((self.grid.size, self.grid.size))
        for a in range(n):
            for b in range(n):
                total = total + self.derivatives[a].T @ sparse.diags(coefficients[:, a, b]) @ self.derivatives[b]
        return (self.weight * total).tocsr()


@lru_cache(maxsize=8)
def _cell_operators(grid: Grid) -> CellOperators:
    n = grid.dim
    lower = np.indices((grid.resolution - 1,) * n).reshape(n, -1).T
    corners = np.array(list(itertools.product((0, 1), repeat=n)))
    corner_index = lower[:, None, :] + corners[None, :, :]
    flat = np.ravel_multi_index(tuple(corner_index[..., k] for k in range(n)), grid.shape)
    flat = flat[grid.active.ravel()[flat].all(axis=1)]
    cells = len(flat)
    rows = np.repeat(np.arange(cells), len(corners))
    scale = 1.0 / (2 ** (n - 1) * grid.h)
    mats = []
    for a in range(n):
        signs = np.where(corners[:, a] == 1, scale, -scale)
        mats.append(sparse.csr_matrix((np.tile(signs, cells), (rows, flat.ravel())), shape=(cells, grid.size)))
    logger.debug("built cell operators for %s: %d active cells", grid.header(), cells)
    return CellOperators(grid=grid, derivatives=tuple(mats))


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """
    Frozen coefficients a_ij = F_ij(∇u) at every active node.

    Attributes:
        grid: Underlying grid.
        matrices: Array of shape (*grid.shape, n, n); NaN on exterior nodes.
        eigen_min: Smallest eigenvalue per node.
        eigen_max: Largest eigenvalue per node.
        window: Eigenvalue range over interior nodes.
    """

    grid: Grid
    matrices: FloatArray = field(repr=False)
    eigen_min: FloatArray = field(repr=False)
    eigen_max: FloatArray = field(repr=False)
    window: EllipticityWindow

    def at(self, point: ArrayLike) -> FloatArray:
        return self.matrices[self.grid.index_of(point)]


@dataclass
class _Problem:
    """Interior unknowns of a Dirichlet problem on a fixed grid."""

    ops: CellOperators
    boundary: BoundaryAssignment

    def __post_init__(self) -> None:
        grid = self.ops.grid
        self.interior = grid.interior_indices
        self.base = np.zeros(grid.size)
        self.base[grid.boundary_indices] = self.boundary.values

    def full(self, x: FloatArray) -> FloatArray:
        u = self.base.copy()
        u[self.interior] = x
        return u

    def energy(self, F: Lagrangian, x: FloatArray) -> float:
        return self.ops.weight * float(np.sum(F.value(self.ops.cell_gradients(self.full(x)))))

    def evaluate(self, F: Lagrangian, x: FloatArray) -> tuple[float, FloatArray, FloatArray]:
        G = self.ops.cell_gradients(self.full(x))
        J = self.ops.weight * float(np.sum(F.value(G)))
        g = self.ops.pullback(F.gradient(G))[self.interior]
        return J, g, G

    def hessian(self, F: Lagrangian, G: FloatArray) -> sparse.csc_matrix:
        H = self.ops.hessian(F.hessian(G))
        return H[self.interior][:, self.interior].tocsc()

    def harmonic_extension(self) -> FloatArray:
        quadratic = LagrangianCatalog.make_builtin("quadratic", dim=self.ops.grid.dim)
        x0 = np.zeros(len(self.interior))
        _, g, G = self.evaluate(quadratic, x0)
        return x0 + spsolve(self.hessian(quadratic, G), -g)


def _max_norm(g: FloatArray) -> float:
    return float(np.abs(g).max()) if g.size else 0.0


def _newton_direction(H: sparse.csc_matrix, g: FloatArray) -> FloatArray:
    """Solve H d = -g, shifting H + mu I when it is singular; steepest descent last."""
    scale = max(float(np.abs(H.diagonal()).max()), np.finfo(float).tiny)
    identity = sparse.identity(H.shape[0], format="csc")
    shift = 0.0
    for _ in range(6):
        matrix = H if shift == 0.0 else (H + shift * identity).tocsc()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MatrixRankWarning)
            d = np.asarray(spsolve(matrix, -g), dtype=float)
        if np.all(np.isfinite(d)) and float(g @ d) < 0:
            return d
        shift = 1e-8 * scale if shift == 0.0 else 100.0 * shift
        logger.debug("Newton system rejected, retrying with shift %.3g", shift)
    logger.warning("Newton direction unavailable; using steepest descent")
    return -g


def _line_search(
    problem: _Problem,
    F: Lagrangian,
    x: FloatArray,
    J: float,
    g: FloatArray,
    d: FloatArray,
) -> tuple[FloatArray, float] | None:
    """Armijo backtracking from a unit step; None when no admissible step exists."""
    slope = float(g @ d)
    if slope >= 0:
        return None
    allowance = ROUNDOFF_ALLOWANCE * max(1.0, abs(J))
    size = float(np.abs(d).max())
    floor = 1e-15 * max(1.0, float(np.abs(x).max()) if x.size else 1.0)
    alpha = 1.0
    for _ in range(MAX_BACKTRACKS):
        if alpha * size < floor:
            return None
        trial = x + alpha * d
        J_trial = problem.energy(F, trial)
        if J_trial <= J + ARMIJO_C * alpha * slope + allowance:
            return trial, J_trial
        alpha *= 0.5
    return None


@dataclass
class _StageResult:
    x: FloatArray
    iterations: int
    residual: float
    converged: bool
    energies: list[float]


def _descend(
    problem: _Problem,
    F: Lagrangian,
    x: FloatArray,
    opts: SolveOptions,
    budget: int,
) -> _StageResult:
    grid = problem.ops.grid
    threshold = opts.tol_residual * grid.h**grid.dim
    J, g, G = problem.evaluate(F, x)
    energies = [J]
    step = 1.0
    previous: tuple[FloatArray, FloatArray] | None = None
    for iteration in range(budget):
        residual = _max_norm(g)
        if residual <= threshold:
            return _StageResult(x, iteration, residual, True, energies)
        if opts.method is SolveMethod.NEWTON_DAMPED:
            d = _newton_direction(problem.hessian(F, G), g)
        else:
            if previous is not None:
                s, y = x - previous[0], g - previous[1]
                sy = float(s @ y)
                step = float(s @ s) / sy if sy > 0 else 2.0 * step
            d = -step * g
        accepted = _line_search(problem, F, x, J, g, d)
        if accepted is None and opts.method is SolveMethod.NEWTON_DAMPED:
            accepted = _line_search(problem, F, x, J, g, -g)
        if accepted is None:
            logger.warning("line search stalled at residual %.3g (threshold %.3g)", residual, threshold)
            return _StageResult(x, iteration, residual, False, energies)
        previous = (x, g)
        x, _ = accepted
        J, g, G = problem.evaluate(F, x)
        energies.append(J)
        logger.debug("iteration %d: J=%.15g residual=%.3g", iteration + 1, J, _max_norm(g))
        if len(energies) > STAGNATION_WINDOW:
            drop = energies[-STAGNATION_WINDOW - 1] - J
            if drop <= ROUNDOFF_ALLOWANCE * max(1.0, abs(J)):
                logger.warning("energy stagnated over %d iterations at residual %.3g", STAGNATION_WINDOW, _max_norm(g))
                residual = _max_norm(g)
                return _StageResult(x, iteration + 1, residual, residual <= threshold, energies)
    residual = _max_norm(g)
    return _StageResult(x, budget, residual, residual <= threshold, energies)


def _gradient_box(problem: _Problem, x: FloatArray, dim: int) -> GradientRegion:
    G = problem.ops.cell_gradients(problem.full(x))
    bound = max(1.0, 2.0 * float(np.abs(G).max()) if G.size else 1.0)
    return GradientRegion.box((-bound,) * dim, (bound,) * dim)


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------

class VariationalSolver:
    """Discrete energies, weak residuals and minimization."""

    @staticmethod
    def energy(F: Lagrangian, u: ScalarField) -> float:
        """J_h(u) = Σ over active cells of h^n F(cell gradient)."""
        if F.dim != u.grid.dim:
            raise InvalidParameterError("Lagrangian and grid dimensions differ")
        ops = CellOperators.build(u.grid)
        G = ops.cell_gradients(np.nan_to_num(u.values.ravel(), nan=0.0))
        return ops.weight * float(np.sum(F.value(G)))

    @staticmethod
    def weak_residual(F: Lagrangian, u: ScalarField, psi: ScalarField) -> float:
        """Discrete ∫ ∇F(∇u)·∇ψ.

        Raises:
            InvalidTestFunctionError: If ψ does not vanish on the boundary ring.
        """
        grid = u.grid
        if psi.grid != grid:
            raise InvalidParameterError("test function lives on another grid")
        if np.any(np.abs(psi.values[grid.boundary]) > TEST_FUNCTION_TOL):
            raise InvalidTestFunctionError("test function must vanish on and outside the boundary ring")
        ops = CellOperators.build(grid)
        G = ops.cell_gradients(np.nan_to_num(u.values.ravel(), nan=0.0))
        flux = F.gradient(G)
        dpsi = ops.cell_gradients(np.nan_to_num(psi.values.ravel(), nan=0.0))
        return ops.weight * float(np.sum(flux * dpsi))

    @staticmethod
    def harmonic_extension(grid: Grid, boundary: BoundaryAssignment) -> ScalarField:
        problem = _Problem(CellOperators.build(grid), boundary)
        return ScalarField(grid, problem.full(problem.harmonic_extension()).reshape(grid.shape))

    @staticmethod
    def minimize(
        F: Lagrangian,
        grid: Grid,
        boundary: BoundaryAssignment,
        opts: SolveOptions | None = None,
    ) -> tuple[ScalarField, ConvergenceReport]:
        """Minimize J_h with boundary values fixed to ``boundary``.

        Starts from the harmonic extension of the boundary data. A
        non-converged solve still returns the field, with the report flag
        cleared.

        Raises:
            NonConvexLagrangianError: If the convexity audit fails.
            InvalidParameterError: On mismatched dimensions or grids.
        """
        opts = opts or SolveOptions()
        if F.dim != grid.dim:
            raise InvalidParameterError(f"Lagrangian has dimension {F.dim}, grid has {grid.dim}")
        if boundary.grid != grid:
            raise InvalidParameterError("boundary data belongs to another grid")
        started = time.perf_counter()
        problem = _Problem(CellOperators.build(grid), boundary)
        x = problem.harmonic_extension()

        if opts.audit:
            audit = LagrangianCatalog.convexity_audit(F, _gradient_box(problem, x, grid.dim), grid=AUDIT_GRID)
            if not audit.passed:
                raise NonConvexLagrangianError(
                    f"{F.label} failed the convexity audit (min eigenvalue {audit.measured['min_eigenvalue']:.3g},"
                    f" violation {audit.measured['violation']:.3g})"
                )

        schedule = opts.schedule(F)
        stages = [F.smoothed(eps) for eps in schedule] or [F]
        iterations = 0
        energies: list[float] = []
        result = _StageResult(x, 0, float("inf"), False, [])
        for eps, objective in zip(schedule or (0.0,), stages):
            budget = opts.max_iters - iterations
            if budget <= 0:
                break
            logger.info("solving %s on %s (eps=%g, %s)", F.label, grid.header(), eps, opts.method)
            result = _descend(problem, objective, x, opts, budget)
            x = result.x
            iterations += result.iterations
            energies.extend(result.energies)
            logger.info("stage eps=%g finished: %d iterations, residual %.3g, converged=%s",
                        eps, result.iterations, result.residual, result.converged)

        u = ScalarField(grid, problem.full(x).reshape(grid.shape))
        report = ConvergenceReport(
            converged=result.converged,
            iterations=iterations,
            energy=VariationalSolver.energy(F, u),
            residual=result.residual,
            threshold=opts.tol_residual * grid.h**grid.dim,
            smoothing_schedule=schedule,
            method=str(opts.method),
            wall_time=time.perf_counter() - started,
            lagrangian=F.label,
            energy_history=tuple(energies),
        )
        if not report.converged:
            logger.warning("solve of %s did not converge within %d iterations", F.label, opts.max_iters)
        return u, report

    @staticmethod
    def coefficient_field(F: Lagrangian, u: ScalarField) -> CoefficientField:
        """a_ij = F_ij(∇u) at every active node, with its eigenvalue range."""
        grid = u.grid
        grad = FieldCalculus.gradient(u).values
        active = grid.active
        matrices = np.full((*grid.shape, grid.dim, grid.dim), np.nan)
        matrices[active] = F.hessian(grad[active])
        eig = np.full((*grid.shape, grid.dim), np.nan)
        eig[active] = np.linalg.eigvalsh(matrices[active])
        eigen_min, eigen_max = eig[..., 0], eig[..., -1]
        lam_min = float(np.min(eigen_min[grid.interior]))
        lam_max = float(np.max(eigen_max[grid.interior]))
        window = EllipticityWindow(
            lambda_min=max(lam_min, 0.0),
            lambda_max=max(lam_max, 0.0),
            region=f"coefficients of {F.label}",
            degenerate=lam_min <= CONVEXITY_TOL,
            samples=int(grid.interior.sum()),
        )
        return CoefficientField(grid, matrices, eigen_min, eigen_max, window)

    @staticmethod
    def barrier_lipschitz_bound(grid: Grid, boundary: BoundaryAssignment) -> float:
        """Largest slope of the linear barriers touching the data at each boundary node.

        At a boundary point x0 with tangential gradient g (least-squares fit
        over neighbouring boundary points), the affine functions
        φ(x0) + g·(x - x0) + t(1 - x0·x) bound φ on the sphere from above
        (t = t+) and below (t = t-). Their slopes |g - t x0| bound the
        Lipschitz constant of minimizers of translation-invariant problems.

        Raises:
            NotApplicableError: On square grids.
        """
        if grid.mask_kind is not MaskKind.BALL:
            raise NotApplicableError("barrier construction needs a ball domain")
        # Work on the unit sphere; slopes scale back by 1/half_width.
        points = grid.boundary_points() / grid.half_width
        values = boundary.values
        tree = cKDTree(points)
        k = min(BARRIER_NEIGHBOURS, len(points))
        _, neighbours = tree.query(points, k=k)
        worst = 0.0
        for i, x0 in enumerate(points):
            offsets = points[neighbours[i]] - x0
            diffs = values[neighbours[i]] - values[i]
            g, *_ = np.linalg.lstsq(offsets, diffs, rcond=None)
            g = g - (g @ x0) * x0
            gap = 1.0 - points @ x0
            usable = gap > 1e-12
            if not np.any(usable):
                continue
            lifted = (values - values[i] - (points - x0) @ g)[usable] / gap[usable]
            slopes = [float(np.linalg.norm(g - t * x0)) for t in (lifted.max(), lifted.min())]
            worst = max(worst, *slopes)
        return worst / grid.half_width

    @staticmethod
    def discrete_lipschitz(u: ScalarField) -> float:
        """Max node-gradient norm over interior nodes."""
        norms = FieldCalculus.gradient(u).norm()
        return float(np.max(norms[u.grid.interior]))
