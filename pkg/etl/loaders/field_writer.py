"""
Scalar field CSV writer (the inverse of ``etl.extractors.field_reader``).
"""

import logging
from pathlib import Path

import pandas as pd

from core.domain.entities.grid import ScalarField

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_field(field: ScalarField, path: str | Path) -> Path:
    """Write ``field`` as a header line plus one CSV row per grid line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    rows = field.values.reshape(grid.size // grid.resolution, grid.resolution)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(grid.header() + "\n")
        pd.DataFrame(rows).to_csv(
            handle, header=False, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n"
        )
    logger.info("Wrote field %s to %s", grid.header(), path)
    return path
