"""
Base class for the lab's management commands.

Every command gets ``--out`` and ``--seed`` with defaults from the
environment. Domain errors leave as CommandError with exit code 2;
non-convergence uses exit code 3.
"""

import argparse
import logging
from collections.abc import Iterable
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rich import box
from rich.console import Console
from rich.table import Table

from config import settings
from core.domain.exceptions import LabError
from etl.extractors.field_reader import FieldFormatError

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
CONSOLE_WIDTH = 120


def parse_floats(text: str, count: int | None = None) -> tuple[float, ...]:
    """Comma-separated floats, e.g. ``1,0,0.2``."""
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {len(values)}")
    return values


class LabCommand(BaseCommand):
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.add_argument("--out", type=Path, default=None, help="Output directory (default: REGLAB_OUTPUT_DIR or ./out).")
        parser.add_argument("--seed", type=int, default=None, help="Random seed (default: REGLAB_SEED or 1).")
        return parser

    def execute(self, *args, **options):
        options["out"] = Path(options.get("out") or settings.get_output_dir())
        if options.get("seed") is None:
            options["seed"] = settings.get_seed()
        try:
            return super().execute(*args, **options)
        except (LabError, FieldFormatError) as e:
            logger.debug("%s failed", self.__module__, exc_info=True)
            raise CommandError(f"{type(e).__name__}: {e}", returncode=EXIT_USAGE) from e

    def summary(self, title: str, rows: Iterable[tuple[str, object]]) -> None:
        """Print a two-column rich table of results."""
        table = Table(title=title, box=box.SIMPLE)
        table.add_column("item")
        table.add_column("value")
        for key, value in rows:
            table.add_row(str(key), str(value))
        console = Console(width=CONSOLE_WIDTH, color_system=None)
        with console.capture() as capture:
            console.print(table)
        self.stdout.write(capture.get(), ending="")
