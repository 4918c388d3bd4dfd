"""
De Giorgi sequence lemmas, thresholds and level profiles.

Usage examples::

    python manage.py degiorgi seq1 --C 2 --delta 1 --a0 1
    python manage.py degiorgi seq2 --c 0.1 --a0 1 --k 10000
    python manage.py degiorgi threshold --C 2 --delta 0.5
    python manage.py degiorgi sweep --Cs 1.5,2,4 --deltas 0.5,1
    python manage.py degiorgi profile --in out/u.csv --heights 0,0.25,0.5,0.75,1

Traces and profiles are written as two-column CSV tables, sweeps as a CSV
matrix (rows C, columns delta).
"""

import logging

import numpy as np
from django.core.management.base import CommandError

from core.services.degiorgi import CONVEX_MAPS, DeGiorgi
from etl.extractors.field_reader import read_field
from etl.loaders import svg_plots
from etl.loaders.report_writer import write_report
from etl.loaders.table_writer import profile_frame, sequence_frame, sweep_frame, write_table
from infrastructure.cli.lab_command import EXIT_USAGE, LabCommand, parse_floats

logger = logging.getLogger(__name__)

ACTIONS = ("seq1", "seq2", "threshold", "sweep", "profile")
DEFAULT_HEIGHTS = tuple(np.round(np.linspace(0.0, 1.0, 11), 12))


class Command(LabCommand):
    help = "Iterate De Giorgi sequences, bisect thresholds and measure level profiles."

    def add_arguments(self, parser):
        parser.add_argument("action", choices=ACTIONS)
        parser.add_argument("--C", dest="C", type=float, default=2.0)
        parser.add_argument("--delta", type=float, default=1.0)
        parser.add_argument("--a0", type=float, default=1.0)
        parser.add_argument("--c", dest="c", type=float, default=0.1)
        parser.add_argument("--k", type=int, default=None, help="Iteration count (seq1: 200, seq2: 1000).")
        parser.add_argument("--Cs", dest="Cs", type=parse_floats, default=(1.5, 2.0, 4.0))
        parser.add_argument("--deltas", type=parse_floats, default=(0.5, 1.0, 2.0))
        parser.add_argument("--in", dest="input", default=None, help="Field CSV for profile.")
        parser.add_argument("--heights", type=parse_floats, default=DEFAULT_HEIGHTS)
        parser.add_argument("--n", type=int, default=2, help="Dimension in the scaling-class exponent.")
        parser.add_argument("--convex", choices=sorted(CONVEX_MAPS), default=None,
                            help="Profile G(v) instead of v (a subsolution built from a solution).")

    def handle(self, *args, **options):
        action = options["action"]
        out = options["out"]
        handler = getattr(self, f"_{action}")
        blocks, rows = handler(options, out)
        write_report(blocks, out / "report.txt")
        self.summary(f"degiorgi {action}", rows)

    # ------------------------------------------------------------------
    # Actions
    # ------------------------------------------------------------------

    def _seq1(self, options, out):
        trace = DeGiorgi.seq_lemma_geometric(options["C"], options["delta"], options["a0"], kmax=options["k"] or 200)
        write_table(sequence_frame(trace), out / "tables" / "seq1.csv")
        svg_plots.plot_sequence(trace, out / "plots" / "seq1.svg")
        return [("seq1", trace)], [("verdict", trace.verdict), ("threshold a0*", f"{trace.threshold:.9g}")]

    def _seq2(self, options, out):
        trace = DeGiorgi.seq_lemma_quadratic(options["c"], options["a0"], kmax=options["k"] or 1000)
        write_table(sequence_frame(trace), out / "tables" / "seq2.csv")
        svg_plots.plot_sequence(trace, out / "plots" / "seq2.svg")
        return [("seq2", trace)], [("verdict", trace.verdict), ("max a_k(1+ck)", f"{trace.bound_ratio_max:.12g}")]

    def _threshold(self, options, out):
        sweep = DeGiorgi.threshold_sweep([options["C"]], [options["delta"]])
        value = float(sweep.thresholds[0, 0])
        lines = [f"C={options['C']!r}", f"delta={options['delta']!r}", f"threshold={value!r}"]
        return [("threshold", lines)], [("threshold a0*", f"{value:.9g}")]

    def _sweep(self, options, out):
        sweep = DeGiorgi.threshold_sweep(options["Cs"], options["deltas"])
        write_table(sweep_frame(sweep), out / "tables" / "threshold_sweep.csv", index=True)
        lines = [f"C={C!r} delta={d!r} threshold={sweep.thresholds[i, j]!r}"
                 for i, C in enumerate(sweep.cs) for j, d in enumerate(sweep.deltas)]
        return [("sweep", lines)], [("cells", sweep.thresholds.size)]

    def _profile(self, options, out):
        if not options["input"]:
            raise CommandError("profile needs --in <field.csv>", returncode=EXIT_USAGE)
        v = read_field(options["input"])
        if options["convex"]:
            v = DeGiorgi.convex_image(v, options["convex"])
        heights = options["heights"]
        blocks, rows = [], []

        measure = DeGiorgi.measure_profile(v, heights)
        write_table(profile_frame(measure), out / "tables" / "w_profile.csv")
        svg_plots.plot_profile(measure, out / "plots" / "w_profile.svg")
        blocks.append(("W", [f"heights={','.join(repr(s) for s in measure.heights)}",
                             f"values={','.join(repr(w) for w in measure.values)}",
                             f"implied_constant={measure.implied_constant!r}"]))
        rows.append(("W implied constant", measure.implied_constant))

        if v.grid.half_width >= 2.0:
            profile = DeGiorgi.v_profile(v, heights)
            write_table(profile_frame(profile), out / "tables" / "v_profile.csv")
            svg_plots.plot_profile(profile, out / "plots" / "v_profile.svg")
            audit = DeGiorgi.scaling_class_audit(profile, options["n"])
            blocks.append(("scaling-class", audit))
            rows.append(("scaling-class C", audit.measured["C"]))
        else:
            logger.warning("V(s) needs a grid covering B_2; half_width is %s", v.grid.half_width)
        return blocks, rows
