"""
Tabular CSV exports built on pandas.

All tables share one float format and a fixed column order so repeated runs
produce byte-identical files.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.domain.entities.gradient_cloud import GradientCloud
from core.domain.entities.homogeneous import HedgehogCloud
from core.domain.entities.reports import HolderFit, IterationTrace, LevelProfile
from core.services.degiorgi import ThresholdSweep

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_table(frame: pd.DataFrame, path: str | Path, *, index: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def _coordinate_columns(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(n)]


def scaling_frame(fit: HolderFit) -> pd.DataFrame:
    """One row per radius; ``decay`` holds the factor to the next radius."""
    decay = list(fit.decay_factors) + [np.nan] if fit.decay_factors else [np.nan] * len(fit.radii)
    return pd.DataFrame({"r": fit.radii, fit.quantity: fit.values, "decay": decay[: len(fit.radii)]})


def cloud_frame(cloud: GradientCloud) -> pd.DataFrame:
    return pd.DataFrame(cloud.points, columns=_coordinate_columns("p", cloud.points.shape[1]))


def hedgehog_frame(cloud: HedgehogCloud) -> pd.DataFrame:
    n = cloud.dim
    frame = pd.concat(
        [
            pd.DataFrame(cloud.points, columns=_coordinate_columns("x", n)),
            pd.DataFrame(cloud.images, columns=_coordinate_columns("p", n)),
            pd.DataFrame(cloud.normals, columns=_coordinate_columns("nu", n)),
        ],
        axis=1,
    )
    frame["residual"] = cloud.residuals
    frame["singular"] = cloud.singular.astype(int)
    frame["orientation"] = cloud.orientation
    frame["component"] = cloud.labels
    return frame


def sequence_frame(trace: IterationTrace) -> pd.DataFrame:
    return pd.DataFrame({"k": np.arange(len(trace.sequence)), "a": trace.sequence})


def profile_frame(profile: LevelProfile) -> pd.DataFrame:
    return pd.DataFrame({"s": profile.heights, profile.kind: profile.values})


def sweep_frame(sweep: ThresholdSweep) -> pd.DataFrame:
    """Thresholds with one row per C and one column per delta."""
    return pd.DataFrame(
        sweep.thresholds,
        index=pd.Index(sweep.cs, name="C"),
        columns=[f"delta={format(d, '.17g')}" for d in sweep.deltas],
    )

