"""
Minimize a variational integral with Dirichlet data.

Usage examples::

    # Laplace equation against the exact harmonic polynomial
    python manage.py solve --lagrangian quadratic --bc "x^2-y^2" --res 129 --exact "x^2-y^2"

    # Degenerate congestion problem with 1-Lipschitz data
    python manage.py solve --lagrangian congestion --bc "x" --res 129

    # p-Laplacian on the unit disk
    python manage.py solve --lagrangian p-laplace --p 3 --bc "x" --mask ball

Writes ``u.csv`` (field format) and ``report.txt`` into ``--out``. Exits 0
on convergence, 3 when the iteration budget runs out, 2 on bad input.
"""

import logging

import numpy as np
from django.core.management.base import CommandError

from config import settings
from core.domain.entities.grid import Grid
from core.domain.exceptions import NotApplicableError
from core.domain.value_objects.mask_kind import MaskKind
from core.domain.value_objects.verdicts import SolveMethod
from core.services.field_calculus import FieldCalculus
from core.services.lagrangian_catalog import BUILTIN_NAMES, LagrangianCatalog
from core.services.variational_solver import SolveOptions, VariationalSolver
from etl.loaders.field_writer import write_field
from etl.loaders.report_writer import write_report
from infrastructure.cli.lab_command import EXIT_NOT_CONVERGED, EXIT_USAGE, LabCommand, parse_floats

logger = logging.getLogger(__name__)

MIN_SOLVE_RESOLUTION = 33


class Command(LabCommand):
    help = "Minimize J(u) = ∫F(∇u) with Dirichlet data and write the minimizer."

    def add_arguments(self, parser):
        parser.add_argument(
            "--lagrangian",
            required=True,
            help=f"Builtin ({', '.join(BUILTIN_NAMES)}) or 'expr:<expression in p1, p2>'.",
        )
        parser.add_argument("--bc", required=True, help="Boundary expression in x, y.")
        parser.add_argument("--res", type=int, default=65, help="Nodes per axis (odd, >= 33).")
        parser.add_argument("--mask", choices=[m.value for m in MaskKind], default=MaskKind.SQUARE.value)
        parser.add_argument("--half-width", type=float, default=1.0, help="Grid covers [-L, L]^2.")
        parser.add_argument("--p", type=float, default=None, help="Exponent for p-laplace.")
        parser.add_argument("--exponents", type=parse_floats, default=None, help="Exponents for anisotropic, e.g. 2,4.")
        parser.add_argument("--profile", default=None, help="Convex profile for separable.")
        parser.add_argument("--method", choices=[m.value for m in SolveMethod], default=SolveMethod.NEWTON_DAMPED.value)
        parser.add_argument("--eps", type=float, default=None, help="First smoothing eps (default: automatic).")
        parser.add_argument("--tol-residual", type=float, default=1e-8)
        parser.add_argument("--max-iters", type=int, default=None, help="Default: REGLAB_MAX_ITERS.")
        parser.add_argument("--no-audit", action="store_true", default=False, help="Skip the convexity audit.")
        parser.add_argument("--exact", default=None, help="Exact solution expression; reports the max node error.")

    def handle(self, *args, **options):
        res = options["res"]
        if res < MIN_SOLVE_RESOLUTION or res % 2 == 0:
            raise CommandError(f"--res must be odd and >= {MIN_SOLVE_RESOLUTION}, got {res}", returncode=EXIT_USAGE)
        max_iters = options["max_iters"] or settings.get_max_iters()

        F = LagrangianCatalog.from_spec(
            options["lagrangian"], dim=2, p=options["p"], exponents=options["exponents"], profile=options["profile"]
        )
        grid = Grid(dim=2, resolution=res, mask_kind=MaskKind(options["mask"]), half_width=options["half_width"])
        boundary = FieldCalculus.trace_boundary(grid, options["bc"])
        opts = SolveOptions(
            tol_residual=options["tol_residual"],
            max_iters=max_iters,
            smoothing_eps=options["eps"],
            method=SolveMethod(options["method"]),
            audit=not options["no_audit"],
        )

        u, report = VariationalSolver.minimize(F, grid, boundary, opts)

        out = options["out"]
        write_field(u, out / "u.csv")
        extra = [f"grid={grid.header()[2:]}", f"bc={boundary.source}",
                 f"lipschitz={VariationalSolver.discrete_lipschitz(u)!r}"]
        try:
            extra.append(f"barrier_bound={VariationalSolver.barrier_lipschitz_bound(grid, boundary)!r}")
        except NotApplicableError:
            logger.debug("barrier bound skipped on %s grid", grid.mask_kind)
        rows = [("lagrangian", F.label), ("converged", report.converged), ("iterations", report.iterations),
                ("energy", f"{report.energy:.12g}"), ("residual", f"{report.residual:.3e}")]
        if options["exact"]:
            exact = FieldCalculus.field_from_expression(grid, options["exact"])
            error = float(np.max(np.abs(u.values - exact.values)[grid.active]))
            extra += [f"exact={options['exact']}", f"exact_max_error={error!r}"]
            rows.append(("max error", f"{error:.3e} (10h² = {10 * grid.h**2:.3e})"))
        write_report([("solve", report), ("run", extra)], out / "report.txt")

        self.summary(f"solve {F.label}", rows)
        if not report.converged:
            raise CommandError(
                f"no convergence after {report.iterations} iterations (residual {report.residual:.3e})",
                returncode=EXIT_NOT_CONVERGED,
            )
