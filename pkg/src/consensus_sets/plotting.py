"""Region plot of the inner/outer consensus sets over the (theta, s) plane.

Rendering is backend-free (matplotlib Figure objects), so importing this
module never touches a display.  Cells are colored dark for the inner set,
light for outer-but-not-inner, and white for excluded points.
"""

from __future__ import annotations

import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.figure import Figure
from matplotlib.patches import Patch

from .inference import ConsensusSets
from .utility import UtilityGrid

INNER_COLOR = "#2c5f8a"
OUTER_COLOR = "#b8d4ea"
EXCLUDED_COLOR = "#ffffff"


def region_categories(grid: UtilityGrid, sets: ConsensusSets) -> np.ndarray:
    """Category of each cell as an (n_s, n_theta) array.

    2 = inner set, 1 = outer set only, 0 = excluded.  Rows follow the s
    axis and columns the theta axis, matching an (x=theta, y=s) plot.
    """
    n_theta, n_s = grid.theta_axis.size, grid.s_axis.size
    inner = sets.inner.reshape(n_theta, n_s).T
    outer = sets.outer.reshape(n_theta, n_s).T
    return np.where(inner, 2, np.where(outer, 1, 0))


def _cell_edges(axis: np.ndarray) -> np.ndarray:
    if axis.size == 1:
        pad = 0.5
        return np.array([axis[0] - pad, axis[0] + pad])
    mids = (axis[:-1] + axis[1:]) / 2.0
    first = axis[0] - (axis[1] - axis[0]) / 2.0
    last = axis[-1] + (axis[-1] - axis[-2]) / 2.0
    return np.concatenate([[first], mids, [last]])


def render_region_plot(path, grid: UtilityGrid, sets: ConsensusSets, alpha=None) -> None:
    """Write the region plot to ``path`` (format from the suffix, e.g. .svg)."""
    cat = region_categories(grid, sets)
    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.subplots()
    ax.pcolormesh(
        _cell_edges(grid.theta_axis),
        _cell_edges(grid.s_axis),
        cat,
        cmap=ListedColormap([EXCLUDED_COLOR, OUTER_COLOR, INNER_COLOR]),
        vmin=0,
        vmax=2,
        edgecolors="none",
    )
    ax.set_xlabel(r"risk / inequality aversion $\theta$")
    ax.set_ylabel(r"shift $s$")
    level = f" ({1 - alpha:.0%} confidence)" if alpha is not None else ""
    ax.set_title(f"consensus set bounds{level}")
    ax.legend(
        handles=[
            Patch(facecolor=INNER_COLOR, label="inner set"),
            Patch(facecolor=OUTER_COLOR, edgecolor="0.7", label="outer set only"),
            Patch(facecolor=EXCLUDED_COLOR, edgecolor="0.7", label="excluded"),
        ],
        loc="upper right",
        framealpha=0.9,
        fontsize=8,
    )
    fig.savefig(path)
