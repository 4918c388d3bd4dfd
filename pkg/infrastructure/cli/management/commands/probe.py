"""
Run regularity probes on a stored field.

Usage examples::

    # Oscillation table over five dyadic radii
    python manage.py probe --in out/u.csv --osc --radii dyadic:5

    # Gradient cloud on B_1/4 chopped by the strip 0.2 <= p1 <= 0.25
    python manage.py probe --in out/u.csv --cloud --r 0.25 --chop-line 1,0,0.2 --gap 0.05

    # Energy inequalities for a p-Laplace solution
    python manage.py probe --in out/u.csv --lagrangian p-laplace --p 3 --caccioppoli 0.25,0.5

Each probe adds a block to ``report.txt``; tables go to ``tables/`` and
figures to ``plots/``. A probe that fails is logged and reported, the
others still run.
"""

import argparse
import logging
from collections.abc import Callable

import numpy as np
import pandas as pd
from django.core.management.base import CommandError

from config import settings
from core.domain.entities.grid import ScalarField
from core.services.lagrangian_catalog import LagrangianCatalog
from core.services.regularity_probes import RegularityProbes
from core.services.variational_solver import VariationalSolver
from etl.extractors.field_reader import read_field
from etl.loaders import svg_plots
from etl.loaders.report_writer import write_report
from etl.loaders.table_writer import cloud_frame, scaling_frame, write_table
from infrastructure.cli.lab_command import EXIT_USAGE, LabCommand, parse_floats

logger = logging.getLogger(__name__)


def parse_radii(text: str) -> tuple[str, tuple[float, ...]]:
    """``dyadic:K`` (K halvings from half the domain) or a comma list."""
    if text.startswith("dyadic:"):
        try:
            count = int(text.split(":", 1)[1])
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"bad dyadic radii {text!r}") from e
        if count < 1:
            raise argparse.ArgumentTypeError("dyadic radii need a count >= 1")
        return "dyadic", (float(count),)
    return "list", parse_floats(text)


class Command(LabCommand):
    help = "Run regularity probes on a field file."

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="input", required=True, help="Field CSV written by solve.")
        parser.add_argument("--center", type=parse_floats, default=None)
        parser.add_argument("--radii", type=parse_radii, default=("dyadic", (5.0,)))
        parser.add_argument("--osc", action="store_true", help="Oscillation table over --radii.")
        parser.add_argument("--holder", action="store_true", help="Hölder exponent fit over --radii.")
        parser.add_argument("--energy-decay", action="store_true")
        parser.add_argument("--lagrangian", default="quadratic", help="Lagrangian defining the coefficients a = D²F(∇u).")
        parser.add_argument("--p", type=float, default=None)
        parser.add_argument("--exponents", type=parse_floats, default=None)
        parser.add_argument("--profile", default=None)
        parser.add_argument("--caccioppoli", type=lambda s: parse_floats(s, 2), default=None, metavar="R_IN,R_OUT")
        parser.add_argument("--courant-lebesgue", type=float, nargs="+", default=None, metavar="R")
        parser.add_argument("--maxprinciple", action="store_true", help="Two-sided check on the dyadic balls.")
        parser.add_argument("--l2linf", action="store_true")
        parser.add_argument("--cap", type=float, default=None, help="L2-Linfinity cap (default: REGLAB_L2LINF_CAP).")
        parser.add_argument("--harnack", type=float, default=None, metavar="R")
        parser.add_argument("--hessian-det", action="store_true")
        parser.add_argument("--cloud", action="store_true", help="Gradient cloud on B_r(center).")
        parser.add_argument("--r", type=float, default=0.25)
        parser.add_argument("--chop-line", type=lambda s: parse_floats(s, 3), default=None, metavar="E1,E2,A")
        parser.add_argument("--gap", type=float, default=0.05)
        parser.add_argument("--chop-circle", type=lambda s: parse_floats(s, 4), default=None,
                            metavar="Q1,Q2,R_IN,R_OUT")
        parser.add_argument("--slack", type=float, default=None, help="Audit slack (default: REGLAB_AUDIT_SLACK).")

    def handle(self, *args, **options):
        u = read_field(options["input"])
        grid = u.grid
        center = np.zeros(grid.dim) if options["center"] is None else np.asarray(options["center"])
        if center.shape != (grid.dim,):
            raise CommandError(f"--center needs {grid.dim} coordinates", returncode=EXIT_USAGE)
        slack = settings.get_audit_slack() if options["slack"] is None else options["slack"]
        out = options["out"]
        radii = self._radii(u, options["radii"])

        blocks: list[tuple[str, object]] = []
        rows: list[tuple[str, object]] = []

        def run(name: str, probe: Callable[[], object]) -> None:
            try:
                result = probe()
            except Exception as e:
                logger.exception("Probe %s failed", name)
                blocks.append((name, [f"error={type(e).__name__}: {e}"]))
                rows.append((name, f"FAILED: {e}"))
                return
            if result is not None:
                blocks.append((name, result))
                rows.append((name, self._headline(result)))

        if options["osc"]:
            run("osc", lambda: self._osc_table(u, center, radii, out))
        if options["holder"]:
            run("holder", lambda: self._holder(u, center, radii, out))
        if options["energy_decay"]:
            run("energy-decay", lambda: self._energy_decay(u, center, out))
        if options["caccioppoli"]:
            r_in, r_out = options["caccioppoli"]
            run("caccioppoli", lambda: RegularityProbes.caccioppoli_audit(
                VariationalSolver.coefficient_field(self._lagrangian(options), u), u, r_in, r_out, center, slack))
        for r in options["courant_lebesgue"] or ():
            run(f"courant-lebesgue r={r:g}", lambda r=r: RegularityProbes.courant_lebesgue_check(u, r, center, slack))
        if options["maxprinciple"]:
            run("maxprinciple", lambda: RegularityProbes.max_principle_check(
                u, [(center, r) for r in radii], two_sided=True))
        if options["l2linf"]:
            cap = settings.get_l2linf_cap() if options["cap"] is None else options["cap"]
            run("l2linf", lambda: RegularityProbes.l2_linf_check(u, cap))
        if options["harnack"] is not None:
            run("harnack", lambda: [f"ratio={RegularityProbes.harnack_ratio(u, center, options['harnack'])!r}"])
        if options["hessian_det"]:
            run("hessian-det", lambda: RegularityProbes.hessian_determinant_audit(
                u, VariationalSolver.coefficient_field(self._lagrangian(options), u).window, center, slack=slack))
        if options["cloud"]:
            run("cloud", lambda: self._cloud(u, center, options, out))

        if not blocks:
            raise CommandError("no probe selected", returncode=EXIT_USAGE)
        write_report(blocks, out / "report.txt")
        self.summary(f"probe {options['input']}", rows)

    # ------------------------------------------------------------------
    # Probe runners
    # ------------------------------------------------------------------

    @staticmethod
    def _radii(u: ScalarField, spec: tuple[str, tuple[float, ...]]) -> list[float]:
        kind, values = spec
        if kind == "dyadic":
            return [u.grid.half_width * 0.5 * 2.0**-k for k in range(int(values[0]))]
        return sorted(values, reverse=True)

    @staticmethod
    def _lagrangian(options):
        return LagrangianCatalog.from_spec(
            options["lagrangian"], dim=2, p=options["p"], exponents=options["exponents"], profile=options["profile"]
        )

    @staticmethod
    def _headline(result) -> str:
        if hasattr(result, "passed"):
            return f"pass={result.passed} margin={result.margin:.3g}"
        if hasattr(result, "alpha"):
            return f"alpha={result.alpha:.4f}"
        lines = result.to_lines() if hasattr(result, "to_lines") else list(result)
        return "; ".join(lines[:3])

    @staticmethod
    def _osc_table(u: ScalarField, center, radii: list[float], out) -> list[str]:
        oscillations = [RegularityProbes.oscillation(u, center, r) for r in radii]
        write_table(pd.DataFrame({"r": radii, "osc": oscillations}), out / "tables" / "osc.csv")
        return [f"r={r!r} osc={o!r}" for r, o in zip(radii, oscillations)]

    @staticmethod
    def _holder(u: ScalarField, center, radii: list[float], out):
        fit = RegularityProbes.holder_fit(u, center, radii)
        write_table(scaling_frame(fit), out / "tables" / "holder.csv")
        svg_plots.plot_scaling(fit, out / "plots" / "holder.svg")
        return fit

    @staticmethod
    def _energy_decay(u: ScalarField, center, out):
        fit = RegularityProbes.energy_decay(u, center)
        write_table(scaling_frame(fit), out / "tables" / "energy_decay.csv")
        svg_plots.plot_scaling(fit, out / "plots" / "energy_decay.svg")
        return fit

    @staticmethod
    def _cloud(u: ScalarField, center, options, out) -> list[str]:
        cloud = RegularityProbes.gradient_cloud(u, center, options["r"])
        lines = [f"r={options['r']!r}", f"points={len(cloud)}", f"diameter={cloud.diameter!r}"]
        line = circle = None
        if options["chop_line"]:
            e1, e2, a = options["chop_line"]
            e = np.array([e1, e2]) / np.hypot(e1, e2)
            verdict = RegularityProbes.chop_halfplane(cloud, e, a, options["gap"])
            lines.append(f"chop_line={verdict}")
            line = (e, a, options["gap"])
        if options["chop_circle"]:
            q1, q2, r_in, r_out = options["chop_circle"]
            verdict = RegularityProbes.chop_circle(cloud, (q1, q2), r_in, r_out)
            lines.append(f"chop_circle={verdict}")
            circle = ((q1, q2), r_in, r_out)
        write_table(cloud_frame(cloud), out / "tables" / "cloud.csv")
        if cloud.points.shape[1] == 2:
            svg_plots.plot_cloud(cloud, out / "plots" / "cloud.svg", line=line, circle=circle)
        return lines
