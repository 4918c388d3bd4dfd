"""
SVG figures drawn with matplotlib (Agg backend).

The hash salt is fixed and the ``Date`` metadata dropped so the same data
always gives the same file.
"""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402
from numpy.typing import ArrayLike  # noqa: E402

from core.domain.entities.gradient_cloud import GradientCloud  # noqa: E402
from core.domain.entities.homogeneous import HedgehogCloud  # noqa: E402
from core.domain.entities.reports import HolderFit, IterationTrace, LevelProfile  # noqa: E402

logger = logging.getLogger(__name__)

HASH_SALT = "reglab"
FIGSIZE = (5.0, 5.0)


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": HASH_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("Wrote figure %s", path)
    return path


def plot_cloud(
    cloud: GradientCloud,
    path: str | Path,
    *,
    line: tuple[ArrayLike, float, float] | None = None,
    circle: tuple[ArrayLike, float, float] | None = None,
) -> Path:
    """Scatter of a 2D gradient cloud with an optional chopping strip or annulus."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    pts = cloud.points
    ax.scatter(pts[:, 0], pts[:, 1], s=4, color="tab:blue", label=f"∇u(B_{cloud.r!r})")
    if line is not None:
        e, a, gap = line
        e = np.asarray(e, dtype=float)
        e = e / np.linalg.norm(e)
        t = np.array([-e[1], e[0]])
        span = max(cloud.diameter, 1.0)
        s = np.linspace(-span, span, 2)
        centre = pts.mean(axis=0) if len(pts) else np.zeros(2)
        base = centre - np.dot(centre, e) * e
        for level in (a, a + gap):
            seg = base[None, :] + level * e[None, :] + s[:, None] * t[None, :]
            ax.plot(seg[:, 0], seg[:, 1], color="tab:red", linewidth=1.0)
    if circle is not None:
        q, r_in, r_out = circle
        q = np.asarray(q, dtype=float)
        for radius in (r_in, r_out):
            ax.add_patch(Circle((q[0], q[1]), radius, fill=False, color="tab:red", linewidth=1.0))
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("p1")
    ax.set_ylabel("p2")
    ax.legend(loc="upper right")
    return _save(fig, path)


def plot_hedgehog(cloud: HedgehogCloud, path: str | Path, pair: tuple[int, int] = (0, 1)) -> Path:
    """Orthographic projection of the images onto coordinates ``pair``; singular points in grey."""
    i, j = pair
    fig, ax = plt.subplots(figsize=FIGSIZE)
    regular = ~cloud.singular
    ax.scatter(cloud.images[regular, i], cloud.images[regular, j], s=3, c=cloud.labels[regular], cmap="viridis")
    ax.scatter(cloud.images[cloud.singular, i], cloud.images[cloud.singular, j], s=3, color="0.6")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel(f"p{i + 1}")
    ax.set_ylabel(f"p{j + 1}")
    ax.set_title(f"{cloud.components} component(s), {cloud.regular_count} regular points")
    return _save(fig, path)


def plot_scaling(fit: HolderFit, path: str | Path) -> Path:
    """Log-log plot of an oscillation or energy sequence against the radius."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.loglog(fit.radii, fit.values, marker="o")
    ax.set_xlabel("r")
    ax.set_ylabel(fit.quantity)
    if not fit.constant:
        ax.set_title(f"exponent {fit.exponent:.4f}")
    return _save(fig, path)


def plot_sequence(trace: IterationTrace, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    k = np.arange(len(trace.sequence))
    values = np.asarray(trace.sequence, dtype=float)
    positive = values > 0
    ax.semilogy(k[positive], values[positive], linewidth=1.0)
    ax.set_xlabel("k")
    ax.set_ylabel("a_k")
    ax.set_title(str(trace.verdict))
    return _save(fig, path)


def plot_profile(profile: LevelProfile, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(profile.heights, profile.values, marker="o")
    ax.set_xlabel("s")
    ax.set_ylabel(f"{profile.kind}(s)")
    return _save(fig, path)
