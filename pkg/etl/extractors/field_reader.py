"""
Scalar field CSV reader.

Reads the file format written by ``etl.loaders.field_writer``: a header
line ``# dim=<n> res=<r> mask=<ball|square> [half_width=<L>]`` followed by
res^n values in row-major order, one row per grid line, ``nan`` on
exterior nodes.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.domain.entities.grid import Grid, ScalarField
from core.domain.exceptions import LabError
from core.domain.value_objects.mask_kind import MaskKind

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("dim", "res", "mask")


class FieldFormatError(Exception):
    """Raised when a field file is missing or malformed."""

    pass


def parse_header(line: str) -> Grid:
    """Build the Grid described by a header line.

    Raises:
        FieldFormatError: If a key is missing or a value is invalid.
    """
    text = line.strip()
    if not text.startswith("#"):
        raise FieldFormatError(f"field header must start with '#', got {text[:40]!r}")
    tokens = {}
    for token in text[1:].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FieldFormatError(f"malformed header token {token!r}")
        tokens[key] = value
    missing = [key for key in REQUIRED_KEYS if key not in tokens]
    if missing:
        raise FieldFormatError(f"field header lacks {', '.join(missing)}")
    try:
        return Grid(
            dim=int(tokens["dim"]),
            resolution=int(tokens["res"]),
            mask_kind=MaskKind(tokens["mask"]),
            half_width=float(tokens.get("half_width", "1.0")),
        )
    except (ValueError, LabError) as e:
        raise FieldFormatError(f"invalid field header {text!r}: {e}") from e


def read_field(path: str | Path) -> ScalarField:
    """Load a ScalarField from ``path``.

    Raises:
        FieldFormatError: If the file is missing, the header is invalid,
            the value count is wrong or an active node holds no number.
    """
    path = Path(path)
    if not path.is_file():
        raise FieldFormatError(f"field file not found: {path}")

    with path.open(encoding="utf-8") as handle:
        grid = parse_header(handle.readline())
        try:
            frame = pd.read_csv(handle, header=None, float_precision="round_trip", na_values=["nan"])
        except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
            raise FieldFormatError(f"cannot parse values in {path}: {e}") from e

    try:
        values = frame.to_numpy(dtype=float)
    except (TypeError, ValueError) as e:
        raise FieldFormatError(f"non-numeric entries in {path}") from e
    expected = (grid.size // grid.resolution, grid.resolution)
    if values.shape != expected:
        raise FieldFormatError(f"{path}: expected {expected[0]} rows of {expected[1]} values, got {values.shape}")

    values = values.reshape(grid.shape)
    if not np.all(np.isfinite(values[grid.active])):
        raise FieldFormatError(f"{path}: active nodes must hold finite values")
    values[~grid.active] = np.nan
    logger.debug("Read %s field from %s", grid.header(), path)
    return ScalarField(grid, values)
