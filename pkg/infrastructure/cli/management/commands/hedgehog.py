"""
Hedgehog and homogeneous-solution verifications.

Usage examples::

    python manage.py hedgehog fourd --samples 2000 --seed 1 --project 1,2 --project 1,3
    python manage.py hedgehog radial --alpha 0.5 --k 2 --n 2
    python manage.py hedgehog zero --res 65
    python manage.py hedgehog support --eps 0.1
"""

import argparse
import logging
from collections.abc import Callable

from django.core.management.base import CommandError

from core.domain.entities.homogeneous import HedgehogCloud, HomogeneousFunction
from core.services.hedgehog import DEFAULT_RATIO_CAP, Hedgehog
from etl.loaders import svg_plots
from etl.loaders.field_writer import write_field
from etl.loaders.report_writer import write_report
from etl.loaders.table_writer import hedgehog_frame, write_table
from infrastructure.cli.lab_command import EXIT_USAGE, LabCommand

logger = logging.getLogger(__name__)

FIXTURES = ("fourd", "radial", "zero", "support")
FOURD_SECOND_FORM_POINT = (1.0, 0.0, 0.2, 0.0)
ELLIPTIC_SAMPLES = 1000


def parse_pair(text: str) -> tuple[int, int]:
    """1-based coordinate pair ``i,j``."""
    try:
        i, j = (int(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a pair like 1,2, got {text!r}") from e
    if i < 1 or j < 1 or i == j:
        raise argparse.ArgumentTypeError("projection coordinates must be distinct and >= 1")
    return i - 1, j - 1


class Command(LabCommand):
    help = "Verify hedgehog correspondences and homogeneous solutions."

    def add_arguments(self, parser):
        parser.add_argument("fixture", choices=FIXTURES)
        parser.add_argument("--samples", type=int, default=2000, help="Sphere samples for clouds.")
        parser.add_argument("--project", type=parse_pair, action="append", default=None, metavar="I,J",
                            help="Coordinate pair for an SVG projection (repeatable).")
        parser.add_argument("--ratio-cap", type=float, default=DEFAULT_RATIO_CAP)
        parser.add_argument("--alpha", type=float, default=0.5)
        parser.add_argument("--k", type=int, default=2)
        parser.add_argument("--n", type=int, default=2)
        parser.add_argument("--res", type=int, default=65, help="Lattice resolution for zero.")
        parser.add_argument("--eps", type=float, default=0.1, help="Support perturbation for support.")

    def handle(self, *args, **options):
        fixture = options["fixture"]
        out = options["out"]
        blocks: list[tuple[str, object]] = []
        rows: list[tuple[str, object]] = []

        def run(name: str, check: Callable[[], object]) -> None:
            try:
                result = check()
            except Exception as e:
                logger.exception("Check %s failed", name)
                blocks.append((name, [f"error={type(e).__name__}: {e}"]))
                rows.append((name, f"FAILED: {e}"))
                return
            blocks.append((name, result))
            rows.append((name, f"pass={result.passed} margin={result.margin:.3g}"
                         if hasattr(result, "passed") else "; ".join(result[:3])))

        if fixture == "fourd":
            self._fourd(options, run, out)
        elif fixture == "radial":
            _, mu, report = Hedgehog.radial_homogeneous_solution(options["alpha"], options["k"], options["n"],
                                                                 seed=options["seed"])
            blocks.append(("radial", report))
            rows += [("mu", repr(mu)), ("residual", f"{report.measured['residual']:.3e}")]
        elif fixture == "zero":
            field, report = Hedgehog.zero_homogeneous_counterexample(options["res"])
            write_field(field, out / "zero_homogeneous.csv")
            blocks.append(("zero", report))
            rows += [("energy", f"{report.measured['energy']:.6g}"), ("oracle", f"{report.measured['energy_oracle']:.6g}")]
        else:
            f = Hedgehog.perturbed_support(options["eps"])
            cloud = self._cloud(f, options, out)
            run("normal_correspondence", lambda: Hedgehog.normal_correspondence_check(cloud, f))
            run("second_form", lambda: Hedgehog.second_form_check(f, (1.0, 0.0)))

        write_report(blocks, out / "report.txt")
        self.summary(f"hedgehog {fixture}", rows)

    # ------------------------------------------------------------------
    # Fixtures
    # ------------------------------------------------------------------

    def _fourd(self, options, run, out) -> None:
        f = Hedgehog.fourd_example()
        spectrum = Hedgehog.hessian_spectrum(f, (1.0, 0.0, 0.0, 0.0))
        run("spectrum", lambda: ["point=1,0,0,0", f"eigenvalues={','.join(repr(v) for v in spectrum)}"])
        cloud = self._cloud(f, options, out)
        keep = Hedgehog.clifford_mask(cloud.points)
        run("normal_correspondence", lambda: Hedgehog.normal_correspondence_check(cloud, f, keep=keep))
        samples = Hedgehog.away_from_clifford(Hedgehog.sphere_samples(4, ELLIPTIC_SAMPLES, options["seed"]))
        run("elliptic_solvability", lambda: Hedgehog.elliptic_solvability_check(f, samples, options["ratio_cap"]))
        run("second_form", lambda: Hedgehog.second_form_check(f, FOURD_SECOND_FORM_POINT))

    def _cloud(self, f: HomogeneousFunction, options, out) -> HedgehogCloud:
        pairs = options["project"] or [(0, 1)]
        for i, j in pairs:
            if max(i, j) >= f.dim:
                raise CommandError(f"projection {i + 1},{j + 1} exceeds dimension {f.dim}", returncode=EXIT_USAGE)
        cloud = Hedgehog.hedgehog_cloud(f, options["samples"], options["seed"])
        write_table(hedgehog_frame(cloud), out / "tables" / f"hedgehog_{f.label.split('(')[0]}.csv")
        for i, j in pairs:
            svg_plots.plot_hedgehog(cloud, out / "plots" / f"hedgehog_p{i + 1}p{j + 1}.svg", (i, j))
        return cloud
